use std::fmt;
use std::str::FromStr;

/// Gold or predicted paraphrase class. Ordered `-1 < 0 < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    NotParaphrase = -1,
    Unsure = 0,
    Paraphrase = 1,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::NotParaphrase, Class::Unsure, Class::Paraphrase];

    pub fn value(self) -> i8 {
        self as i8
    }

    pub fn from_value(v: i64) -> Option<Class> {
        match v {
            -1 => Some(Class::NotParaphrase),
            0 => Some(Class::Unsure),
            1 => Some(Class::Paraphrase),
            _ => None,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseClassError {
    NotAnInteger,
    OutOfRange(i64),
}

impl FromStr for Class {
    type Err = ParseClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: i64 = s
            .trim()
            .parse()
            .map_err(|_| ParseClassError::NotAnInteger)?;
        Class::from_value(v).ok_or(ParseClassError::OutOfRange(v))
    }
}
