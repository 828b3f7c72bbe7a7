//! Whitespace-insensitive token reader shared by the text file formats.
//! `#` starts a comment that runs to the end of the line.

use std::str::FromStr;

use thiserror::Error;

use crate::scalar::parse_rational;
use crate::Rational;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("unexpected end of input, expected {0}")]
    Eof(String),
    #[error("token {index}: expected {expected}, found `{found}`")]
    Unexpected {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("token {index}: {message}")]
    Invalid { index: usize, message: String },
}

pub struct Tokens<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    pub fn new(input: &'a str) -> Self {
        let tokens = input
            .lines()
            .flat_map(|line| {
                let body = line.split('#').next().unwrap_or("");
                body.split_whitespace()
            })
            .collect();
        Self { tokens, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    pub fn next_token(&mut self, what: &str) -> Result<&'a str, TextError> {
        let t = self
            .tokens
            .get(self.pos)
            .copied()
            .ok_or_else(|| TextError::Eof(what.to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    pub fn expect(&mut self, literal: &str) -> Result<(), TextError> {
        let index = self.pos;
        let t = self.next_token(&format!("`{literal}`"))?;
        if t == literal {
            Ok(())
        } else {
            Err(TextError::Unexpected {
                index,
                expected: format!("`{literal}`"),
                found: t.to_string(),
            })
        }
    }

    pub fn parse<T: FromStr>(&mut self, what: &str) -> Result<T, TextError> {
        let index = self.pos;
        let t = self.next_token(what)?;
        t.parse().map_err(|_| TextError::Unexpected {
            index,
            expected: what.to_string(),
            found: t.to_string(),
        })
    }

    pub fn rational(&mut self) -> Result<Rational, TextError> {
        let index = self.pos;
        let t = self.next_token("rational")?;
        parse_rational(t).map_err(|e| TextError::Invalid {
            index,
            message: e.to_string(),
        })
    }

    pub fn invalid(&self, message: impl Into<String>) -> TextError {
        TextError::Invalid {
            index: self.pos.saturating_sub(1),
            message: message.into(),
        }
    }
}
