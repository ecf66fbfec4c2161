//! Plain-text operator descriptions.
//!
//! ```text
//! spec  := "diagonal" list
//!        | "dense" matrix
//!        | "torus_laplacian" "n=" int ["dims=" int]
//!        | "shifted(" spec "," ["eps="] number ")"
//!        | "inverse(" spec ")"
//!        | "frac_power(" spec "," number ")"
//! ```
//!
//! Lists and matrices use JSON array syntax: `diagonal [1, 2, 4]`, `dense [[2, 1], [0, 3]]`.

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::quadrature::QuadratureScheme;

pub fn build_operator(spec: &str) -> Result<Operator> {
    let mut p = Parser { src: spec, pos: 0 };
    let op = p.spec()?;
    p.skip_ws();
    if p.pos != spec.len() {
        return Err(p.error("trailing input"));
    }
    Ok(op)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at column {} in {:?}", self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {token:?}")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let len = self.rest().find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_')).unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected an operator kind"));
        }
        let id = &self.rest()[..len];
        self.pos += len;
        Ok(id)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len =
            self.rest().find(|ch: char| !(ch.is_ascii_digit() || matches!(ch, '.' | '-' | '+' | 'e' | 'E'))).unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        let v = text.parse::<f64>().map_err(|_| self.error(&format!("expected a number, found {text:?}")))?;
        self.pos += len;
        Ok(v)
    }

    /// A balanced JSON array starting at the cursor.
    fn json_array<T: serde::de::DeserializeOwned>(&mut self) -> Result<T> {
        self.skip_ws();
        if !self.rest().starts_with('[') {
            return Err(self.error("expected '['"));
        }
        let mut depth = 0usize;
        let mut end = None;
        for (i, ch) in self.rest().char_indices() {
            match ch {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(i + 1);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| self.error("unbalanced brackets"))?;
        let text = &self.rest()[..end];
        let v = serde_json::from_str(text).map_err(|e| self.error(&format!("bad array ({e})")))?;
        self.pos += end;
        Ok(v)
    }

    fn key_value(&mut self, key: &str) -> Result<Option<f64>> {
        let save = self.pos;
        if self.eat(key) && self.eat("=") {
            return self.number().map(Some);
        }
        self.pos = save;
        Ok(None)
    }

    fn spec(&mut self) -> Result<Operator> {
        let start = self.pos;
        match self.ident()? {
            "diagonal" => Operator::diagonal(&self.json_array::<Vec<f64>>()?),
            "dense" => Operator::dense_real(&self.json_array::<Vec<Vec<f64>>>()?),
            "torus_laplacian" => {
                let n = self.key_value("n")?.ok_or_else(|| self.error("expected n=<grid size>"))?;
                let dims = self.key_value("dims")?.unwrap_or(1.0);
                if n.fract() != 0.0 || dims.fract() != 0.0 || n < 1.0 || dims < 1.0 {
                    return Err(self.error("grid size and dims must be positive integers"));
                }
                Operator::torus_laplacian(n as usize, dims as usize)
            }
            "shifted" => {
                self.expect("(")?;
                let base = self.spec()?;
                self.expect(",")?;
                let eps = match self.key_value("eps")? {
                    Some(v) => v,
                    None => self.number()?,
                };
                self.expect(")")?;
                base.shifted(eps)
            }
            "inverse" => {
                self.expect("(")?;
                let base = self.spec()?;
                self.expect(")")?;
                base.inverse()
            }
            "frac_power" => {
                self.expect("(")?;
                let base = self.spec()?;
                self.expect(",")?;
                let e = self.number()?;
                self.expect(")")?;
                base.frac_power(e, &QuadratureScheme::default())
            }
            other => {
                self.pos = start;
                Err(self.error(&format!("unknown operator kind {other:?}")))
            }
        }
    }
}
