// SPDX-License-Identifier: Apache-2.0

//! Whitespace tokenizer shared by the LEF and DEF readers.

use super::DesignError;

/// Coordinates beyond this magnitude are rejected so arithmetic cannot overflow.
pub(crate) const COORD_LIMIT: i64 = 1 << 40;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub line: usize,
}

pub(crate) struct Lexer<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(c) => &raw[..c],
                None => raw,
            };
            tokens.extend(line.split_whitespace().map(|t| Token { text: t, line: i + 1 }));
        }
        Self { tokens, pos: 0 }
    }

    pub fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.line)
            .unwrap_or(1)
    }

    pub fn err(&self, message: impl Into<String>) -> DesignError {
        DesignError::Parse { line: self.line(), message: message.into() }
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.text)
    }

    pub fn next(&mut self) -> Option<&'a str> {
        let t = self.tokens.get(self.pos)?;
        self.pos += 1;
        Some(t.text)
    }

    pub fn expect_any(&mut self, what: &str) -> Result<&'a str, DesignError> {
        self.next().ok_or_else(|| self.err(format!("unexpected end of input, expected {what}")))
    }

    pub fn expect(&mut self, want: &str) -> Result<(), DesignError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(DesignError::Parse { line, message: format!("expected '{want}', found '{t}'") }),
            None => Err(self.err(format!("unexpected end of input, expected '{want}'"))),
        }
    }

    pub fn eat(&mut self, want: &str) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn int(&mut self) -> Result<i64, DesignError> {
        let line = self.line();
        let t = self.expect_any("integer")?;
        let v: i64 = t
            .parse()
            .map_err(|_| DesignError::Parse { line, message: format!("malformed integer '{t}'") })?;
        if v.abs() > COORD_LIMIT {
            return Err(DesignError::Parse { line, message: format!("value {v} out of range") });
        }
        Ok(v)
    }

    pub fn count(&mut self) -> Result<usize, DesignError> {
        let line = self.line();
        let v = self.int()?;
        usize::try_from(v).map_err(|_| DesignError::Parse { line, message: format!("negative count {v}") })
    }

    pub fn float(&mut self) -> Result<f64, DesignError> {
        let line = self.line();
        let t = self.expect_any("number")?;
        let v: f64 = t
            .parse()
            .map_err(|_| DesignError::Parse { line, message: format!("malformed number '{t}'") })?;
        if !v.is_finite() {
            return Err(DesignError::Parse { line, message: format!("non-finite number '{t}'") });
        }
        Ok(v)
    }

    /// Skips tokens through the next `;`.
    pub fn skip_statement(&mut self) -> Result<(), DesignError> {
        while let Some(t) = self.next() {
            if t == ";" {
                return Ok(());
            }
        }
        Err(self.err("unterminated statement"))
    }

    /// Skips tokens through `END <name>`.
    pub fn skip_block(&mut self, name: &str) -> Result<(), DesignError> {
        while let Some(t) = self.next() {
            if t == "END" && self.peek() == Some(name) {
                self.pos += 1;
                return Ok(());
            }
        }
        Err(self.err(format!("missing END {name}")))
    }
}
