//! Expression parser. Parses coordinate expressions over a chart into
//! normalized graded series: rationals, coordinate names, `+`, `-`, `*`,
//! `/` (by a nonzero rational constant), `^` (nonnegative integer powers),
//! parentheses, and calls of registered opaque functions.
//!
//! Multiplication parses order-sensitively and normalization applies the
//! sign rule afterwards, so `theta2*theta1` and `theta1*theta2` both parse
//! and agree up to the Koszul sign. The grammar accepts everything the
//! series printer emits, so printing and re-parsing a polynomial-coefficient
//! series is the identity.

use z2n_core::{ChartRef, Coeff, Error, FnRegistry, Monomial, OpExpr, Rat, Result, Series};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn syntax_error(pos: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("syntax error at position {pos}: {msg}"))
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push(Spanned { tok: Tok::Plus, pos: i });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, pos: i });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, pos: i });
                i += 1;
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, pos: i });
                i += 1;
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, pos: i });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, pos: i });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, pos: i });
                i += 1;
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, pos: i });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s = &text[start..i];
                let v: u64 = s
                    .parse()
                    .map_err(|_| syntax_error(start, format!("integer '{s}' out of range")))?;
                out.push(Spanned { tok: Tok::Num(v), pos: start });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                // Trailing apostrophes belong to the identifier: doubled
                // charts name their copies t', t''.
                while i < bytes.len() && bytes[i] == b'\'' {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(text[start..i].to_string()), pos: start });
            }
            other => return Err(syntax_error(i, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    at: usize,
    chart: &'a ChartRef,
    registry: &'a FnRegistry,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|s| s.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|s| s.tok.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(syntax_error(pos, format!("expected {what}"))),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Series> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor (('*' | '/') factor)*
    fn term(&mut self) -> Result<Series> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?)?;
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.bump();
                    let rhs = self.factor()?;
                    let c = constant_of(&rhs).ok_or_else(|| {
                        syntax_error(pos, "division is only defined by nonzero rational constants")
                    })?;
                    if c == Rat::from_integer(0.into()) {
                        return Err(syntax_error(pos, "division by zero"));
                    }
                    acc = acc.scale(&(Rat::from_integer(1.into()) / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    // factor := '-' factor | power
    fn factor(&mut self) -> Result<Series> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    // power := atom ('^' uint)?
    fn power(&mut self) -> Result<Series> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Num(k)) => {
                    let k = u32::try_from(k)
                        .map_err(|_| syntax_error(pos, "exponent out of range"))?;
                    return base.pow(k);
                }
                _ => return Err(syntax_error(pos, "expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    // atom := number | ident | ident '(' args ')' | '(' expr ')'
    fn atom(&mut self) -> Result<Series> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => {
                Ok(Series::constant(self.chart, Rat::from_integer((v as i64).into())))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.bump();
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some(Tok::RParen)) {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Some(Tok::Comma) => {
                                    self.bump();
                                }
                                _ => break,
                            }
                        }
                    }
                    self.expect(Tok::RParen, "')'")?;
                    return self.call(&name, args, pos);
                }
                match self.chart.lookup(&name) {
                    Some(id) => Ok(Series::coord(self.chart, id)),
                    None => Err(Error::InvalidInput(format!(
                        "unknown name '{name}' at position {pos}: not a coordinate of chart \
                         '{}' nor a registered function",
                        self.chart.name()
                    ))),
                }
            }
            Some(t) => Err(syntax_error(pos, format!("unexpected token {t:?}"))),
            None => Err(syntax_error(pos, "unexpected end of input")),
        }
    }

    /// Opaque function call: arguments must be purely degree-0 series (no
    /// formal part), which become coefficient-level expressions.
    fn call(&mut self, name: &str, args: Vec<Series>, pos: usize) -> Result<Series> {
        let f = self.registry.get(name).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown function '{name}' at position {pos}: registered functions are {}",
                self.registry.names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let mut exprs = Vec::with_capacity(args.len());
        for (k, a) in args.iter().enumerate() {
            if !a.formal_part().is_structural_zero() {
                return Err(Error::InvalidInput(format!(
                    "argument {} of '{name}' at position {pos} contains formal variables; \
                     opaque functions take degree-0 arguments",
                    k + 1
                )));
            }
            exprs.push(a.coefficient_of(&Monomial::unit(self.chart.formal_count())).to_expr());
        }
        let coeff = Coeff::from_expr(OpExpr::call(f.clone(), exprs)?);
        Series::single(self.chart, Monomial::unit(self.chart.formal_count()), coeff)
    }
}

/// The constant value of a series, when it is one.
fn constant_of(s: &Series) -> Option<Rat> {
    if !s.formal_part().is_structural_zero() {
        return None;
    }
    s.coefficient_of(&Monomial::unit(s.chart().formal_count())).as_constant()
}

/// Parse `text` as an expression over `chart`, resolving function calls in
/// `registry`. Returns the normalized series.
pub fn parse_expression(text: &str, chart: &ChartRef, registry: &FnRegistry) -> Result<Series> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(syntax_error(0, "empty expression"));
    }
    let mut p = Parser { toks, at: 0, chart, registry, end: text.len() };
    let s = p.expr()?;
    if p.at != p.toks.len() {
        return Err(syntax_error(p.pos(), "trailing input after expression"));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use z2n_core::{Chart, Degree, FormalVariable};

    fn deg(bits: &[u8]) -> Degree {
        Degree::new(bits.to_vec()).unwrap()
    }

    fn chart() -> ChartRef {
        Chart::with_default_domain(
            "U",
            2,
            6,
            vec!["t".into()],
            vec![
                FormalVariable { name: "z".into(), degree: deg(&[1, 1]) },
                FormalVariable { name: "theta1".into(), degree: deg(&[0, 1]) },
                FormalVariable { name: "theta2".into(), degree: deg(&[1, 0]) },
            ],
        )
        .unwrap()
    }

    fn reg() -> FnRegistry {
        FnRegistry::builtins()
    }

    fn parse(text: &str) -> Series {
        parse_expression(text, &chart(), &reg()).unwrap()
    }

    #[test]
    fn sum_of_body_and_odd_pair() {
        let c = chart();
        let s = parse("t + theta1*theta2");
        let t = Series::coord(&c, c.lookup("t").unwrap());
        let th1 = Series::coord(&c, c.lookup("theta1").unwrap());
        let th2 = Series::coord(&c, c.lookup("theta2").unwrap());
        let expected = t.add(&th1.mul(&th2).unwrap()).unwrap();
        assert_eq!(s.exact_eq(&expected), Some(true));
    }

    #[test]
    fn odd_square_normalizes_to_zero_not_a_parse_error() {
        let c = chart();
        assert_eq!(parse("theta1*theta1").exact_eq(&Series::zero(&c)), Some(true));
        assert_eq!(parse("theta1^2").exact_eq(&Series::zero(&c)), Some(true));
        assert_eq!(parse("theta1^5").exact_eq(&Series::zero(&c)), Some(true));
    }

    #[test]
    fn reversed_product_folds_the_koszul_sign() {
        // z has degree (1,1), theta1 degree (0,1): pairing 1, so
        // theta1*z = -z*theta1 in canonical order.
        let got = parse("theta1*z");
        let expected = parse("z*theta1").neg();
        assert_eq!(got.exact_eq(&expected), Some(true), "got {got}");
        // theta1 and theta2 have pairing 0 and commute.
        assert_eq!(
            parse("theta2*theta1").exact_eq(&parse("theta1*theta2")),
            Some(true)
        );
    }

    #[test]
    fn precedence_and_unary_minus() {
        // ^ binds tighter than unary minus, * tighter than +.
        assert_eq!(parse("-t^2").exact_eq(&parse("-(t^2)")), Some(true));
        assert_eq!(parse("1 + 2*t").exact_eq(&parse("2*t + 1")), Some(true));
        assert_eq!(parse("-t + t").exact_eq(&Series::zero(&chart())), Some(true));
        assert_eq!(parse("2^3").exact_eq(&parse("8")), Some(true));
    }

    #[test]
    fn rational_literals_and_division() {
        assert_eq!(parse("3/2*t").exact_eq(&parse("t*3/2")), Some(true));
        assert_eq!(parse("t/2").exact_eq(&parse("1/2*t")), Some(true));
        let err = parse_expression("t/z", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("nonzero rational constants"), "{err}");
        let err = parse_expression("t/0", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("division by zero"), "{err}");
    }

    #[test]
    fn unknown_name_and_syntax_errors_carry_positions() {
        let err = parse_expression("t + bogus", &chart(), &reg()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown name 'bogus'") && msg.contains("position 4"), "{msg}");
        let err = parse_expression("t + ", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("position 4"), "{err}");
        let err = parse_expression("(t", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("expected ')'"), "{err}");
    }

    #[test]
    fn opaque_calls_parse_and_reject_formal_arguments() {
        let s = parse("arctan2(sin(t), cos(t))");
        // Numerically this is t on (-1, 1).
        let v = s.body_at(&[0.5]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let err = parse_expression("sin(z)", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("degree-0 arguments"), "{err}");
        let err = parse_expression("sin(t, t)", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("expects 1 argument"), "{err}");
        let err = parse_expression("sinh(t)", &chart(), &reg()).unwrap_err();
        assert!(err.to_string().contains("unknown function 'sinh'"), "{err}");
    }

    #[test]
    fn primed_identifiers_tokenize() {
        let c = chart();
        let doubled = c.doubled().unwrap();
        let s = parse_expression("t + t' + theta1*theta1'", &doubled, &reg()).unwrap();
        let t = Series::coord(&doubled, doubled.lookup("t").unwrap());
        let tp = Series::coord(&doubled, doubled.lookup("t'").unwrap());
        let h = Series::coord(&doubled, doubled.lookup("theta1").unwrap());
        let hp = Series::coord(&doubled, doubled.lookup("theta1'").unwrap());
        let expected = t.add(&tp).unwrap().add(&h.mul(&hp).unwrap()).unwrap();
        assert_eq!(s.exact_eq(&expected), Some(true));
    }

    #[test]
    fn print_parse_round_trip_on_hand_examples() {
        for text in [
            "3/2*t^2*theta1*theta2 - z*theta1 + 1",
            "t",
            "0",
            "-1/3 + t*z - 2*z*theta1*theta2",
            "(t + 1)*z",
            "(arctan2(sin(t), cos(t)))*theta1 + t",
        ] {
            let s = parse(text);
            let printed = s.to_string();
            let back = parse(&printed);
            assert_eq!(
                back.eq_up_to(&s, 6, None, &Default::default()).unwrap(),
                true,
                "round trip failed: '{text}' printed as '{printed}'"
            );
        }
    }
}
