//! Text format for algebra elements: a signed sum of terms, each an
//! optional complex coefficient times generator powers, e.g.
//! `(2+3i)*x0^2*x1 - x3 + 1`.

use crate::error::QminkError;
use crate::matrixcore::{c, cr, C64};
use crate::qalgebra::{MultiIndex, Poly};

/// Render a complex number the way the parser accepts it.
pub fn format_complex(z: C64) -> String {
    let re_zero = z.re == 0.0;
    let im_zero = z.im == 0.0;
    if im_zero {
        format!("{}", z.re)
    } else if re_zero {
        if z.im == 1.0 {
            "i".to_string()
        } else if z.im == -1.0 {
            "-i".to_string()
        } else {
            format!("{}i", z.im)
        }
    } else if z.im < 0.0 {
        format!("({}-{}i)", z.re, -z.im)
    } else {
        format!("({}+{}i)", z.re, z.im)
    }
}

fn format_monomial(idx: MultiIndex) -> String {
    let mut parts = Vec::new();
    for (g, &e) in idx.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("x{}", g)),
            _ => parts.push(format!("x{}^{}", g, e)),
        }
    }
    parts.join("*")
}

/// Render a polynomial; `parse_poly(print_poly(p))` reproduces `p` exactly.
pub fn print_poly(p: &Poly) -> String {
    if p.terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (&idx, &coeff)) in p.terms.iter().enumerate() {
        let mono = format_monomial(idx);
        // pull the sign out front for real or pure-imaginary coefficients
        let negative =
            (coeff.im == 0.0 && coeff.re < 0.0) || (coeff.re == 0.0 && coeff.im < 0.0);
        let (sign, body) = if negative {
            ("-", format_complex(-coeff))
        } else {
            ("+", format_complex(coeff))
        };
        if i == 0 {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(if sign == "-" { " - " } else { " + " });
        }
        let coeff_is_one = body == "1";
        if mono.is_empty() {
            out.push_str(&body);
        } else if coeff_is_one {
            out.push_str(&mono);
        } else {
            out.push_str(&body);
            out.push('*');
            out.push_str(&mono);
        }
    }
    out
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src: src.as_bytes(), pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> QminkError {
        QminkError::Parse { column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64, QminkError> {
        let start = self.pos;
        while self.peek().map_or(false, |b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while self.peek().map_or(false, |b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if !self.peek().map_or(false, |b| b.is_ascii_digit()) {
                return Err(self.err("expected exponent digits"));
            }
            while self.peek().map_or(false, |b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<f64>()
            .map_err(|e| self.err(format!("bad numeric literal: {}", e)))
    }

    /// number with optional trailing `i`, or bare `i`
    fn simple_complex(&mut self, sign: f64) -> Result<C64, QminkError> {
        if self.eat(b'i') {
            return Ok(c(0.0, sign));
        }
        let v = self.number()?;
        if self.eat(b'i') {
            Ok(c(0.0, sign * v))
        } else {
            Ok(cr(sign * v))
        }
    }

    /// `(a+bi)` / `(a-bi)` or a simple literal
    fn complex_literal(&mut self) -> Result<C64, QminkError> {
        if self.eat(b'(') {
            self.skip_ws();
            let sign1 = if self.eat(b'-') { -1.0 } else { 1.0 };
            self.skip_ws();
            let first = self.simple_complex(sign1)?;
            self.skip_ws();
            let total = if self.peek() == Some(b'+') || self.peek() == Some(b'-') {
                let sign2 = if self.eat(b'-') { -1.0 } else { self.pos += 1; 1.0 };
                self.skip_ws();
                first + self.simple_complex(sign2)?
            } else {
                first
            };
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            Ok(total)
        } else {
            self.simple_complex(1.0)
        }
    }

    fn generator_power(&mut self) -> Result<(u8, u8), QminkError> {
        if !self.eat(b'x') {
            return Err(self.err("expected generator 'x0'..'x3'"));
        }
        let g = match self.peek() {
            Some(d @ b'0'..=b'3') => {
                self.pos += 1;
                d - b'0'
            }
            _ => return Err(self.err("expected generator index 0..3")),
        };
        let mut e = 1u8;
        self.skip_ws();
        let caret_pos = self.pos;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.peek().map_or(false, |b| b.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == start {
                self.pos = caret_pos;
                return Err(self.err("expected exponent after '^'"));
            }
            e = std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse::<u8>()
                .map_err(|e| self.err(format!("exponent out of range: {}", e)))?;
        }
        Ok((g, e))
    }

    /// one product of factors: coefficient and/or generator powers joined by `*`
    fn term(&mut self) -> Result<(MultiIndex, C64), QminkError> {
        let mut coeff = cr(1.0);
        let mut exps = [0u8; 4];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'x') => {
                    let (g, e) = self.generator_power()?;
                    exps[g as usize] = exps[g as usize]
                        .checked_add(e)
                        .ok_or_else(|| self.err("exponent overflow"))?;
                }
                Some(b'(') | Some(b'i') | Some(b'0'..=b'9') | Some(b'.') => {
                    coeff *= self.complex_literal()?;
                }
                _ => return Err(self.err("expected a coefficient or generator")),
            }
            self.skip_ws();
            if !self.eat(b'*') {
                break;
            }
        }
        Ok((MultiIndex(exps), coeff))
    }
}

/// Parse the textual polynomial format.
pub fn parse_poly(src: &str) -> Result<Poly, QminkError> {
    let mut cur = Cursor::new(src);
    let mut poly = Poly::zero();
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.err("empty input"));
    }
    loop {
        cur.skip_ws();
        let sign = if cur.eat(b'-') {
            -1.0
        } else {
            cur.eat(b'+');
            1.0
        };
        let (idx, coeff) = cur.term()?;
        poly.add_term(idx, coeff * cr(sign));
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some(b'+') | Some(b'-') => continue,
            Some(b) => return Err(cur.err(format!("unexpected character '{}'", b as char))),
        }
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::c;

    #[test]
    fn parse_examples() {
        let p = parse_poly("(2+3i)*x0^2*x1 - x3 + 1").unwrap();
        assert_eq!(p.terms.len(), 3);
        assert_eq!(
            p.terms.get(&MultiIndex([2, 1, 0, 0])).copied().unwrap(),
            c(2.0, 3.0)
        );
        assert_eq!(p.terms.get(&MultiIndex([0, 0, 0, 1])).copied().unwrap(), cr(-1.0));
        assert_eq!(p.terms.get(&MultiIndex([0, 0, 0, 0])).copied().unwrap(), cr(1.0));
    }

    #[test]
    fn parse_variants() {
        assert!(parse_poly("0").unwrap().is_zero());
        let p = parse_poly("i*x2").unwrap();
        assert_eq!(p.terms.get(&MultiIndex([0, 0, 1, 0])).copied().unwrap(), c(0.0, 1.0));
        let p = parse_poly(" - 2.5 * x1 ^ 0").unwrap();
        assert_eq!(p.terms.get(&MultiIndex::ONE).copied().unwrap(), cr(-2.5));
        let p = parse_poly("x0*x0").unwrap();
        assert_eq!(p.terms.get(&MultiIndex([2, 0, 0, 0])).copied().unwrap(), cr(1.0));
        let p = parse_poly("(1-1i)").unwrap();
        assert_eq!(p.terms.get(&MultiIndex::ONE).copied().unwrap(), c(1.0, -1.0));
        let p = parse_poly("(-2e-1+0.5i)*x3^2").unwrap();
        assert_eq!(p.terms.get(&MultiIndex([0, 0, 0, 2])).copied().unwrap(), c(-0.2, 0.5));
    }

    #[test]
    fn parse_errors_report_columns() {
        match parse_poly("x0^").unwrap_err() {
            QminkError::Parse { column, .. } => assert_eq!(column, 3),
            e => panic!("unexpected error {:?}", e),
        }
        assert!(parse_poly("").is_err());
        assert!(parse_poly("x4").is_err());
        assert!(parse_poly("x0 +").is_err());
        assert!(parse_poly("(2+3j)").is_err());
        assert!(parse_poly("x0 x1").is_err());
    }

    #[test]
    fn print_examples() {
        let mut p = Poly::zero();
        p.add_term(MultiIndex([2, 1, 0, 0]), c(2.0, 3.0));
        p.add_term(MultiIndex([0, 0, 0, 1]), cr(-1.0));
        p.add_term(MultiIndex::ONE, cr(1.0));
        let s = print_poly(&p);
        assert_eq!(s, "1 - x3 + (2+3i)*x0^2*x1");
        assert!(parse_poly(&s).unwrap().approx_eq(&p, 0.0));
        assert_eq!(print_poly(&Poly::zero()), "0");
    }

    #[test]
    fn round_trip_random() {
        let mut k = 3u64;
        let mut rand = move || {
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((k >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for _ in 0..50 {
            let mut p = Poly::zero();
            for idx in crate::qalgebra::monomials_up_to_degree(3) {
                if rand() > 0.4 {
                    p.add_term(idx, c(rand() * 3.0, rand() * 3.0));
                }
            }
            let rt = parse_poly(&print_poly(&p)).unwrap();
            assert!(rt.approx_eq(&p, 0.0), "{}", print_poly(&p));
        }
    }
}
