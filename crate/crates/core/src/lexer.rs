//! Lightweight lexer for C-like sources.
//!
//! Recognizes comments, string and character literals, identifiers, numbers,
//! and punctuation (maximal munch). It never fails: unterminated literals and
//! comments end at the newline or end of input, and unknown characters become
//! single-character punctuation. Preprocessor directives are lexed normally
//! but every token on a directive line carries `in_directive = true`.

/// Token classes produced by [`lex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    LineComment,
    BlockComment,
}

impl TokenKind {
    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::LineComment | TokenKind::BlockComment)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// Zero-based physical line of the first byte.
    pub start_line: usize,
    /// Zero-based physical line of the last byte.
    pub end_line: usize,
    pub in_directive: bool,
}

const PUNCT3: [&str; 3] = ["<<=", ">>=", "..."];
const PUNCT2: [&str; 20] = [
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=", "/=", "%=", "+=", "-=",
    "&=", "^=", "|=", "##",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    /// True until a token has been seen on the current logical line.
    at_line_start: bool,
    in_directive: bool,
}

impl<'a> Lexer<'a> {
    fn peek(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    /// Length of a backslash-newline splice at `pos`, if any.
    fn splice_len(&self, pos: usize) -> usize {
        if self.bytes.get(pos) != Some(&b'\\') {
            return 0;
        }
        match (self.bytes.get(pos + 1), self.bytes.get(pos + 2)) {
            (Some(b'\n'), _) => 2,
            (Some(b'\r'), Some(b'\n')) => 3,
            _ => 0,
        }
    }

    fn bump(&mut self) {
        if self.bytes[self.pos] == b'\n' {
            self.line += 1;
        }
        self.pos += 1;
    }

    fn bump_char(&mut self) {
        let ch_len = self.src[self.pos..]
            .chars()
            .next()
            .map(char::len_utf8)
            .unwrap_or(1);
        for _ in 0..ch_len {
            self.bump();
        }
    }

    fn skip_whitespace(&mut self) {
        while self.pos < self.bytes.len() {
            let splice = self.splice_len(self.pos);
            if splice > 0 {
                for _ in 0..splice {
                    self.bump();
                }
                continue;
            }
            match self.bytes[self.pos] {
                b'\n' => {
                    self.bump();
                    self.at_line_start = true;
                    self.in_directive = false;
                }
                b' ' | b'\t' | b'\r' | 0x0b | 0x0c => self.bump(),
                _ => break,
            }
        }
    }

    fn line_comment(&mut self) {
        while self.pos < self.bytes.len() {
            let splice = self.splice_len(self.pos);
            if splice > 0 {
                for _ in 0..splice {
                    self.bump();
                }
                continue;
            }
            if self.bytes[self.pos] == b'\n' {
                break;
            }
            self.bump();
        }
    }

    fn block_comment(&mut self) {
        self.bump();
        self.bump();
        while self.pos < self.bytes.len() {
            if self.bytes[self.pos] == b'*' && self.peek(1) == Some(b'/') {
                self.bump();
                self.bump();
                return;
            }
            self.bump();
        }
    }

    fn quoted(&mut self, quote: u8) {
        self.bump();
        while self.pos < self.bytes.len() {
            let splice = self.splice_len(self.pos);
            if splice > 0 {
                for _ in 0..splice {
                    self.bump();
                }
                continue;
            }
            match self.bytes[self.pos] {
                b'\\' => {
                    self.bump();
                    if self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.bump_char();
                    }
                }
                b'\n' => return,
                b if b == quote => {
                    self.bump();
                    return;
                }
                _ => self.bump_char(),
            }
        }
    }

    fn ident(&mut self) {
        while let Some(b) = self.peek(0) {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'$' {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) {
        while let Some(b) = self.peek(0) {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'\'' {
                let exp = matches!(b, b'e' | b'E' | b'p' | b'P');
                self.bump();
                if exp && matches!(self.peek(0), Some(b'+') | Some(b'-')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn punct(&mut self) {
        let rest = &self.src[self.pos..];
        if let Some(p) = PUNCT3.iter().find(|p| rest.starts_with(**p)) {
            for _ in 0..p.len() {
                self.bump();
            }
        } else if let Some(p) = PUNCT2.iter().find(|p| rest.starts_with(**p)) {
            for _ in 0..p.len() {
                self.bump();
            }
        } else {
            self.bump_char();
        }
    }

    fn next_token(&mut self) -> Option<Token<'a>> {
        self.skip_whitespace();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        let start_line = self.line;
        let b = self.bytes[self.pos];
        let kind = match b {
            b'/' if self.peek(1) == Some(b'/') => {
                self.line_comment();
                TokenKind::LineComment
            }
            b'/' if self.peek(1) == Some(b'*') => {
                self.block_comment();
                TokenKind::BlockComment
            }
            b'"' => {
                self.quoted(b'"');
                TokenKind::Str
            }
            b'\'' => {
                self.quoted(b'\'');
                TokenKind::Char
            }
            b if b.is_ascii_alphabetic() || b == b'_' || b == b'$' => {
                self.ident();
                // Encoding prefixes: L"..", u8"..", u'..', U"..".
                let word = &self.src[start..self.pos];
                match (word, self.peek(0)) {
                    ("L" | "u" | "U" | "u8", Some(q @ (b'"' | b'\''))) => {
                        self.quoted(q);
                        if q == b'"' {
                            TokenKind::Str
                        } else {
                            TokenKind::Char
                        }
                    }
                    _ => TokenKind::Ident,
                }
            }
            b if b.is_ascii_digit() => {
                self.number();
                TokenKind::Number
            }
            b'.' if self.peek(1).is_some_and(|c| c.is_ascii_digit()) => {
                self.number();
                TokenKind::Number
            }
            _ => {
                if b == b'#' && self.at_line_start {
                    self.in_directive = true;
                }
                self.punct();
                TokenKind::Punct
            }
        };
        if !kind.is_comment() {
            self.at_line_start = false;
        }
        let text = &self.src[start..self.pos];
        let end_line = start_line + text.trim_end_matches('\n').matches('\n').count();
        Some(Token {
            kind,
            text,
            start_line,
            end_line,
            in_directive: self.in_directive,
        })
    }
}

/// Tokenizes `src`, including comment tokens.
pub fn lex(src: &str) -> Vec<Token<'_>> {
    let mut lexer = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        line: 0,
        at_line_start: true,
        in_directive: false,
    };
    std::iter::from_fn(|| lexer.next_token()).collect()
}

/// Number of physical lines; a trailing newline does not open a new line.
pub fn physical_line_count(src: &str) -> usize {
    if src.is_empty() {
        return 0;
    }
    let newlines = src.matches('\n').count();
    if src.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, &str)> {
        lex(src).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn comment_markers_inside_literals_are_not_comments() {
        let toks = kinds(r#"char *s = "//not a comment"; char c = '/';"#);
        assert!(toks.iter().all(|(k, _)| !k.is_comment()));
        assert!(toks.contains(&(TokenKind::Str, r#""//not a comment""#)));
        assert!(toks.contains(&(TokenKind::Char, "'/'")));
    }

    #[test]
    fn maximal_munch_operators() {
        let toks = kinds("a&&b||c->d<<=2?x:y");
        let puncts: Vec<&str> = toks
            .iter()
            .filter(|(k, _)| *k == TokenKind::Punct)
            .map(|(_, t)| *t)
            .collect();
        assert_eq!(puncts, vec!["&&", "||", "->", "<<=", "?", ":"]);
    }

    #[test]
    fn block_comment_spans_lines() {
        let toks = lex("int a; /* one\ntwo\nthree */ int b;");
        let c = toks.iter().find(|t| t.kind == TokenKind::BlockComment).unwrap();
        assert_eq!((c.start_line, c.end_line), (0, 2));
        let b = toks.iter().find(|t| t.text == "b").unwrap();
        assert_eq!(b.start_line, 2);
    }

    #[test]
    fn escaped_quote_does_not_end_string() {
        let toks = kinds(r#"s = "a\"b//c"; x"#);
        assert_eq!(toks[2], (TokenKind::Str, r#""a\"b//c""#));
        assert_eq!(toks.last().unwrap().1, "x");
    }

    #[test]
    fn directive_flag_ends_at_newline() {
        let toks = lex("#if X\nif (x) y;\n  #define Y 1\n");
        let flags: Vec<(&str, bool)> = toks.iter().map(|t| (t.text, t.in_directive)).collect();
        assert_eq!(flags[0], ("#", true));
        assert_eq!(flags[1], ("if", true));
        assert_eq!(flags[3], ("if", false));
        assert!(flags.iter().any(|&(t, d)| t == "define" && d));
    }

    #[test]
    fn directive_continues_across_splice() {
        let toks = lex("#define M(a) \\\n  ((a) ? 1 : 0)\nint z;");
        let q = toks.iter().find(|t| t.text == "?").unwrap();
        assert!(q.in_directive);
        assert_eq!(q.start_line, 1);
        assert!(!toks.iter().find(|t| t.text == "z").unwrap().in_directive);
    }

    #[test]
    fn hash_mid_line_is_not_a_directive() {
        let toks = lex("x = a # b;");
        assert!(toks.iter().all(|t| !t.in_directive));
    }

    #[test]
    fn prefixed_literals() {
        let toks = kinds(r#"w = L"wide"; c = u8'x';"#);
        assert!(toks.contains(&(TokenKind::Str, r#"L"wide""#)));
        assert!(toks.contains(&(TokenKind::Char, "u8'x'")));
    }

    #[test]
    fn numbers_with_exponents() {
        let toks = kinds("1.5e-3 + 0x1p+4 .5f");
        assert_eq!(toks[0], (TokenKind::Number, "1.5e-3"));
        assert_eq!(toks[2], (TokenKind::Number, "0x1p+4"));
        assert_eq!(toks[3], (TokenKind::Number, ".5f"));
    }

    #[test]
    fn unterminated_inputs_do_not_panic() {
        for src in ["\"abc", "'", "/* open", "// x\\", "\\", "é\u{0}#"] {
            let _ = lex(src);
        }
    }

    #[test]
    fn line_counts() {
        assert_eq!(physical_line_count(""), 0);
        assert_eq!(physical_line_count("a"), 1);
        assert_eq!(physical_line_count("a\n"), 1);
        assert_eq!(physical_line_count("a\n\n"), 2);
    }

    proptest::proptest! {
        #[test]
        fn tokens_never_overlap_and_lines_are_ordered(src in "\\PC{0,200}") {
            let toks = lex(&src);
            let mut last_line = 0;
            for t in &toks {
                proptest::prop_assert!(t.start_line <= t.end_line);
                proptest::prop_assert!(t.start_line >= last_line);
                last_line = t.start_line;
                proptest::prop_assert!(!t.text.is_empty());
            }
        }
    }
}
