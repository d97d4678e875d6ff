//! Synthesizes a buffer-size probe and classifies a few candidate answers.

use codegauge::probe::{classify_answer, synthesize_probe, ProbeFamily};

pub fn run_example() -> Result<u64, Box<dyn std::error::Error>> {
    let probe = synthesize_probe(ProbeFamily::LenStringMissingLetter, 3);
    println!("{}", probe.prompt_text());
    let truth = probe.ground_truth;
    for answer in [truth.to_string(), (truth + 1).to_string(), "about 25".into(), String::new()] {
        println!("{answer:>10?} -> {:?}", classify_answer(&answer, truth));
    }
    Ok(truth)
}

fn main() {
    run_example().unwrap();
}
