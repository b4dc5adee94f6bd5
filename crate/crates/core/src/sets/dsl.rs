//! Textual expression language.
//!
//! ```text
//! expr := empty | all
//!       | explicit {n, …}           | residue m {r, …}
//!       | blocks geometric r        | blocks poly q
//!       | blocks list [z1; z2, …] (repeat-last | cycle)?
//!       | greedy p/q | greedy 0.123 | predicate name
//!       | union(expr, expr) | inter(expr, expr) | diff(expr, expr)
//!       | symdiff(expr, expr) | midpoint(expr, expr) | compl(expr)
//!       | dilate k expr | shift k expr | ( expr )
//! ```
//!
//! Whitespace between tokens is ignored. Errors carry the byte offset of
//! the offending token.

use std::fmt;

use crate::rational::parse_rational;

use super::{SetExpr, Tail, ZSpec, DEFAULT_EXPLICIT_CAP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the parsed line.
    pub offset: usize,
    /// 1-based line number when parsing a multi-line document.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, byte {}: {}", self.offset, self.message),
            None => write!(f, "byte {}: {}", self.offset, self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub explicit_cap: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { explicit_cap: DEFAULT_EXPLICIT_CAP }
    }
}

impl std::error::Error for ParseError {}

pub fn parse(text: &str) -> Result<SetExpr, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<SetExpr, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0, end: text.len(), options };
    let expr = parser.expr()?;
    match parser.tokens.get(parser.pos) {
        None => Ok(expr),
        Some(t) => Err(error(t.offset, format!("unexpected `{}` after expression", t.kind))),
    }
}

/// One expression per line; blank lines and lines starting with `#` are skipped.
pub fn parse_lines(text: &str, options: ParseOptions) -> Result<Vec<SetExpr>, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty() && !line.trim_start().starts_with('#'))
        .map(|(i, line)| parse_with(line, options).map_err(|e| ParseError { line: Some(i + 1), ..e }))
        .collect()
}

fn error(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError { offset, line: None, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Word(String),
    Number(String),
    Punct(char),
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Word(w) | Kind::Number(w) => f.write_str(w),
            Kind::Punct(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_ascii_alphabetic() {
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                    word.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: Kind::Word(word), offset });
        } else if c.is_ascii_digit() || c == '.' {
            let mut number = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_ascii_digit() || c == '.' {
                    number.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            tokens.push(Token { kind: Kind::Number(number), offset });
        } else if "{}()[],;/".contains(c) {
            tokens.push(Token { kind: Kind::Punct(c), offset });
            chars.next();
        } else {
            return Err(error(offset, format!("unexpected character `{c}`")));
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
    options: ParseOptions,
}

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn next(&mut self, expected: &str) -> Result<Token, ParseError> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| error(self.end, format!("expected {expected}, found end of input")))?;
        self.pos += 1;
        Ok(token)
    }

    fn peek_punct(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some(Token { kind: Kind::Punct(p), .. }) if *p == c)
    }

    fn punct(&mut self, c: char) -> Result<usize, ParseError> {
        let token = self.next(&format!("`{c}`"))?;
        match token.kind {
            Kind::Punct(p) if p == c => Ok(token.offset),
            other => Err(error(token.offset, format!("expected `{c}`, found `{other}`"))),
        }
    }

    fn word(&mut self, expected: &str) -> Result<(String, usize), ParseError> {
        let token = self.next(expected)?;
        match token.kind {
            Kind::Word(w) => Ok((w, token.offset)),
            other => Err(error(token.offset, format!("expected {expected}, found `{other}`"))),
        }
    }

    fn int(&mut self) -> Result<(u64, usize), ParseError> {
        let token = self.next("an integer")?;
        match &token.kind {
            Kind::Number(n) => n
                .parse::<u64>()
                .map(|v| (v, token.offset))
                .map_err(|_| error(token.offset, format!("`{n}` is not a nonnegative integer"))),
            other => Err(error(token.offset, format!("expected an integer, found `{other}`"))),
        }
    }

    /// Integers separated by commas, up to (not including) `close`.
    fn int_list(&mut self, close: char) -> Result<Vec<u64>, ParseError> {
        let mut out = Vec::new();
        if self.peek_punct(close) {
            return Ok(out);
        }
        loop {
            out.push(self.int()?.0);
            if self.peek_punct(close) {
                return Ok(out);
            }
            self.punct(',')?;
        }
    }

    fn pair(&mut self) -> Result<(SetExpr, SetExpr), ParseError> {
        self.punct('(')?;
        let a = self.expr()?;
        self.punct(',')?;
        let b = self.expr()?;
        self.punct(')')?;
        Ok((a, b))
    }

    fn expr(&mut self) -> Result<SetExpr, ParseError> {
        if self.peek_punct('(') {
            self.punct('(')?;
            let e = self.expr()?;
            self.punct(')')?;
            return Ok(e);
        }
        let (word, at) = self.word("an expression")?;
        let set_err = |offset: usize| move |e: super::SetError| error(offset, e.to_string());
        match word.as_str() {
            "empty" => Ok(SetExpr::Empty),
            "all" => Ok(SetExpr::All),
            "explicit" => {
                let open = self.punct('{')?;
                let elements = self.int_list('}')?;
                self.punct('}')?;
                SetExpr::explicit_capped(elements, self.options.explicit_cap).map_err(set_err(open))
            }
            "residue" => {
                let (modulus, m_at) = self.int()?;
                self.punct('{')?;
                let residues = self.int_list('}')?;
                self.punct('}')?;
                SetExpr::residue(modulus, residues).map_err(set_err(m_at))
            }
            "blocks" => {
                let spec = self.zspec()?;
                SetExpr::blocks(spec).map_err(set_err(at))
            }
            "greedy" => {
                let start = self.offset();
                let mut literal = match self.next("a target density")?.kind {
                    Kind::Number(n) => n,
                    other => return Err(error(start, format!("expected a target density, found `{other}`"))),
                };
                if self.peek_punct('/') {
                    self.punct('/')?;
                    let (q, _) = self.int()?;
                    literal = format!("{literal}/{q}");
                }
                let target = parse_rational(&literal).map_err(|e| error(start, e.to_string()))?;
                SetExpr::greedy(target).map_err(set_err(start))
            }
            "predicate" => {
                let (name, name_at) = self.word("a predicate name")?;
                SetExpr::predicate(&name).map_err(set_err(name_at))
            }
            "union" => self.pair().map(|(a, b)| SetExpr::union(a, b)),
            "inter" => self.pair().map(|(a, b)| SetExpr::inter(a, b)),
            "diff" => self.pair().map(|(a, b)| SetExpr::diff(a, b)),
            "symdiff" => self.pair().map(|(a, b)| SetExpr::sym_diff(a, b)),
            "midpoint" => self.pair().map(|(a, b)| SetExpr::midpoint(a, b)),
            "compl" => {
                self.punct('(')?;
                let a = self.expr()?;
                self.punct(')')?;
                Ok(SetExpr::compl(a))
            }
            "dilate" => {
                let (k, k_at) = self.int()?;
                let a = self.expr()?;
                SetExpr::dilate(k, a).map_err(set_err(k_at))
            }
            "shift" => {
                let (k, _) = self.int()?;
                Ok(SetExpr::shift(k, self.expr()?))
            }
            other => Err(error(at, format!("unknown expression keyword `{other}`"))),
        }
    }

    fn zspec(&mut self) -> Result<ZSpec, ParseError> {
        let (form, at) = self.word("`geometric`, `poly` or `list`")?;
        match form.as_str() {
            "geometric" => Ok(ZSpec::Geometric { ratio: self.int()?.0 }),
            "poly" => {
                let (q, q_at) = self.int()?;
                let exponent = u32::try_from(q).map_err(|_| error(q_at, "exponent too large"))?;
                Ok(ZSpec::Poly { exponent })
            }
            "list" => {
                self.punct('[')?;
                let (first, _) = self.int()?;
                self.punct(';')?;
                let rest = self.int_list(']')?;
                self.punct(']')?;
                let mut lengths = vec![first];
                lengths.extend(rest);
                let tail = match self.tokens.get(self.pos) {
                    Some(Token { kind: Kind::Word(w), .. }) if w == "repeat-last" => Tail::RepeatLast,
                    Some(Token { kind: Kind::Word(w), .. }) if w == "cycle" => Tail::Cycle,
                    _ => return Ok(ZSpec::List { lengths, tail: Tail::RepeatLast }),
                };
                self.pos += 1;
                Ok(ZSpec::List { lengths, tail })
            }
            other => Err(error(at, format!("unknown block form `{other}`"))),
        }
    }
}

fn join(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// Writes `e` in the DSL; `parse(render(e))` denotes the same set.
pub(crate) fn render(e: &SetExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        SetExpr::Empty => f.write_str("empty"),
        SetExpr::All => f.write_str("all"),
        SetExpr::Explicit(x) => write!(f, "explicit{{{}}}", join(x)),
        SetExpr::Residue { modulus, residues } => write!(f, "residue {modulus} {{{}}}", join(residues)),
        SetExpr::Blocks(b) => match b.spec() {
            ZSpec::Geometric { ratio } => write!(f, "blocks geometric {ratio}"),
            ZSpec::Poly { exponent } => write!(f, "blocks poly {exponent}"),
            ZSpec::List { lengths, tail } => {
                let tail = match tail {
                    Tail::RepeatLast => "repeat-last",
                    Tail::Cycle => "cycle",
                };
                write!(f, "blocks list [{};{}] {tail}", lengths[0], join(&lengths[1..]))
            }
        },
        SetExpr::Greedy(g) => write!(f, "greedy {}/{}", g.target().numer(), g.target().denom()),
        SetExpr::Predicate(p) => write!(f, "predicate {p}"),
        SetExpr::Union(a, b) => write!(f, "union({a},{b})"),
        SetExpr::Inter(a, b) => write!(f, "inter({a},{b})"),
        SetExpr::Diff(a, b) => write!(f, "diff({a},{b})"),
        SetExpr::SymDiff(a, b) => write!(f, "symdiff({a},{b})"),
        SetExpr::Compl(a) => write!(f, "compl({a})"),
        SetExpr::Dilate(k, a) => write!(f, "dilate {k} {a}"),
        SetExpr::Shift(k, a) => write!(f, "shift {k} {a}"),
        SetExpr::Midpoint(m) => write!(f, "midpoint({},{})", m.lower(), m.upper()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    #[test]
    fn every_form_parses_and_round_trips() {
        let inputs = [
            "empty",
            "all",
            "explicit{1,4,6}",
            "residue 4 {0,2}",
            "blocks geometric 2",
            "blocks poly 3",
            "blocks list [0;1,2,4] repeat-last",
            "blocks list [3;1,2] cycle",
            "greedy 1/3",
            "predicate primes",
            "predicate pairing",
            "union(residue 2 {0},predicate pow2)",
            "inter(all,compl(blocks geometric 3))",
            "diff(all,explicit{})",
            "symdiff(residue 3 {1},residue 3 {2})",
            "dilate 2 blocks geometric 2",
            "shift 3 dilate 5 residue 7 {1,2}",
            "midpoint(residue 4 {0},residue 2 {0})",
        ];
        for text in inputs {
            let e = parse(text).unwrap_or_else(|err| panic!("{text}: {err}"));
            assert_eq!(e.to_string(), text);
            assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("  union ( residue 2 { 0 } ,\tdilate 3 all )  ").unwrap();
        let b = parse("union(residue 2{0},dilate 3 all)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decimal_targets_are_exact() {
        let e = parse("greedy 0.41421356").unwrap();
        let SetExpr::Greedy(g) = e else { panic!() };
        assert_eq!(*g.target(), Rational::new(41_421_356, 100_000_000));
    }

    #[test]
    fn errors_point_at_offending_token() {
        let err = parse("union(all, frobnicate)").unwrap_err();
        assert_eq!(err.offset, 11);
        assert!(parse("residue 3 {3}").unwrap_err().message.contains("out of range"));
        assert!(parse("predicate fibonacci").unwrap_err().message.contains("unknown predicate"));
        assert_eq!(parse("union(all").unwrap_err().offset, 9);
        assert!(parse("greedy 3/2").is_err());
        assert!(parse("all all").is_err());
        assert!(parse("explicit{3,2}").is_err());
    }

    #[test]
    fn explicit_cap_is_configurable() {
        let options = ParseOptions { explicit_cap: 2 };
        assert!(parse_with("explicit{1,2,3}", options).is_err());
        assert!(parse_with("explicit{1,2}", options).is_ok());
    }

    #[test]
    fn lines_skip_comments_and_report_line_numbers() {
        let doc = "# chain\nresidue 2 {0}\n\nresidue 4 {0}\nbogus\n";
        let err = parse_lines(doc, ParseOptions::default()).unwrap_err();
        assert_eq!(err.line, Some(5));
        let ok = parse_lines("residue 2 {0}\n# x\nall\n", ParseOptions::default()).unwrap();
        assert_eq!(ok.len(), 2);
    }
}
