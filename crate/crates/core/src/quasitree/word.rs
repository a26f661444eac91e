use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One generator of the word alphabet. Upper case is the adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    U,
    UStar,
    Q,
    QStar,
    /// `u + q`
    P,
    /// `u* + q*`
    PStar,
}

impl Letter {
    fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'u' => Letter::U,
            'U' => Letter::UStar,
            'q' => Letter::Q,
            'Q' => Letter::QStar,
            'p' => Letter::P,
            'P' => Letter::PStar,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Letter::U => 'u',
            Letter::UStar => 'U',
            Letter::Q => 'q',
            Letter::QStar => 'Q',
            Letter::P => 'p',
            Letter::PStar => 'P',
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            Letter::U => Letter::UStar,
            Letter::UStar => Letter::U,
            Letter::Q => Letter::QStar,
            Letter::QStar => Letter::Q,
            Letter::P => Letter::PStar,
            Letter::PStar => Letter::P,
        }
    }
}

/// A product of generators written left to right as an operator product:
/// the rightmost letter acts first.
///
/// The text form is a sequence of letters from `uUqQpP`, each optionally
/// followed by a repetition count, e.g. `p3P3` for `p³ (p*)³`. Whitespace is
/// ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn power(letter: Letter, count: usize) -> Self {
        Word(vec![letter; count])
    }

    /// `p^ℓ₁ (p*)^ℓ₂`.
    pub fn moment(l1: usize, l2: usize) -> Self {
        let mut w = vec![Letter::P; l1];
        w.extend(std::iter::repeat_n(Letter::PStar, l2));
        Word(w)
    }

    pub fn then(mut self, other: &Word) -> Self {
        self.0.extend_from_slice(&other.0);
        self
    }

    pub fn adjoint(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.adjoint()).collect())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let letter = Letter::from_char(c)
                .ok_or_else(|| Error::param(format!("unknown letter {c:?} in word {s:?}")))?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().copied().filter(char::is_ascii_digit) {
                digits.push(d);
                chars.next();
            }
            let count = if digits.is_empty() {
                1
            } else {
                digits
                    .parse::<usize>()
                    .map_err(|_| Error::param(format!("bad repetition count {digits:?}")))?
            };
            letters.extend(std::iter::repeat_n(letter, count));
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            write!(f, "{}", l.as_char())?;
            if run > 1 {
                write!(f, "{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}
