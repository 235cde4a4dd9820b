//! Arithmetic on numbers, `pi` and the field symbol `B`, for values such as
//! `3B`, `pi/4` or `2*pi*2/16`.

use std::f64::consts::PI;

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    b: Option<f64>,
}

impl Parser<'_> {
    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    v *= self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    v /= self.unary()?;
                }
                // implicit product: `3B`, `2pi`, `2(1+B)`
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => v *= self.unary()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"pi" => Ok(PI),
                    b"B" => self.b.ok_or_else(|| "`B` is not available here".to_string()),
                    // exponent-less names only
                    other => Err(format!("unknown symbol `{}`", String::from_utf8_lossy(other))),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos];
                    let exp_sign = (c == b'+' || c == b'-') && matches!(self.s[self.pos - 1], b'e' | b'E');
                    let exp = (c == b'e' || c == b'E')
                        && self.s.get(self.pos + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+');
                    if c.is_ascii_digit() || c == b'.' || exp || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let t = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                t.parse().map_err(|_| format!("bad number `{t}`"))
            }
            Some(c) => Err(format!("unexpected `{}`", c as char)),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates `text`; `b` supplies the value of the symbol `B`.
pub fn eval(text: &str, b: Option<f64>) -> Result<f64, String> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, b };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(format!("trailing input in `{text}`"));
    }
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(eval("1.5", None).unwrap(), 1.5);
        assert_eq!(eval("3B", Some(2.0)).unwrap(), 6.0);
        assert_eq!(eval("3*B + 1", Some(2.0)).unwrap(), 7.0);
        assert!((eval("2*pi*2/16", None).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((eval("pi/4", None).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(eval("1e-8", None).unwrap(), 1e-8);
        assert_eq!(eval("2.5E+2", None).unwrap(), 250.0);
        assert_eq!(eval("-2(1+2)", None).unwrap(), -6.0);
        assert!(eval("3B", None).is_err());
        assert!(eval("1/0", None).is_err());
        assert!(eval("2x", None).is_err());
        assert!(eval("1 2", None).is_err());
        assert!(eval("", None).is_err());
    }
}
