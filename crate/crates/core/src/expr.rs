//! Small arithmetic parser for angle arguments such as `pi/4`, `-3pi/4`,
//! `2*atan(1/2)` or `0.785`.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError(pub String);

impl std::fmt::Display for ExprError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ExprError {}

pub fn parse_expr(src: &str) -> Result<f64, ExprError> {
    let mut p = Parser {
        chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    if p.chars.is_empty() {
        return Err(ExprError("empty expression".into()));
    }
    let v = p.sum()?;
    if p.pos != p.chars.len() {
        return Err(ExprError(format!(
            "unexpected `{}` at offset {} in `{src}`",
            p.chars[p.pos], p.pos
        )));
    }
    if !v.is_finite() {
        return Err(ExprError(format!(
            "`{src}` does not evaluate to a finite number"
        )));
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64, ExprError> {
        let mut v = self.product()?;
        loop {
            if self.eat('+') {
                v += self.product()?;
            } else if self.eat('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64, ExprError> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else if matches!(self.peek(), Some(c) if c.is_alphabetic() || c == '(') {
                // implicit multiplication: `3pi`, `2atan(x)`
                v *= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if !self.eat(')') {
                    return Err(ExprError("missing `)`".into()));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_alphanumeric()) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match name.as_str() {
                    "pi" | "π" => Ok(PI),
                    "atan" | "tan" | "sqrt" => {
                        if !self.eat('(') {
                            return Err(ExprError(format!(
                                "`{name}` needs an argument in parentheses"
                            )));
                        }
                        let arg = self.sum()?;
                        if !self.eat(')') {
                            return Err(ExprError("missing `)`".into()));
                        }
                        Ok(match name.as_str() {
                            "atan" => arg.atan(),
                            "tan" => arg.tan(),
                            _ => arg.sqrt(),
                        })
                    }
                    other => Err(ExprError(format!("unknown name `{other}`"))),
                }
            }
            Some(c) => Err(ExprError(format!("unexpected `{c}`"))),
            None => Err(ExprError("unexpected end of expression".into())),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map_err(|_| ExprError(format!("bad number `{text}`")))
    }
}
