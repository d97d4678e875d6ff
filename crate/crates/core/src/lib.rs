pub mod build;
pub mod config;
pub mod corpus;
pub mod exec;
pub mod feedback;
pub mod fuzz;
pub mod gateway;
pub mod lexer;
pub mod metrics;
pub mod parrot;
pub mod pipeline;
pub mod probe;
pub mod report;
pub mod sast;
pub mod session;
pub mod validator;
