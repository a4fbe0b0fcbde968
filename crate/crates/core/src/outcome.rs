use std::fmt;

use serde::{Deserialize, Serialize};

/// Result of a {−1, 0, +1}-valued measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Outcome {
    Minus,
    Zero,
    Plus,
}

impl Outcome {
    /// Fixed label order used for inverse-CDF sampling and table layout.
    pub const ALL: [Outcome; 3] = [Outcome::Minus, Outcome::Zero, Outcome::Plus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Minus => -1,
            Outcome::Zero => 0,
            Outcome::Plus => 1,
        }
    }

    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn is_zero(self) -> bool {
        self == Outcome::Zero
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.value()
    }
}

impl TryFrom<i8> for Outcome {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(Outcome::Minus),
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::Plus),
            other => Err(format!("outcome must be -1, 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Which of a side's two observables is measured: unprimed (A, B) or primed (A′, B′).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Setting {
    Unprimed,
    Primed,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::Unprimed, Setting::Primed];

    pub fn index(self) -> usize {
        match self {
            Setting::Unprimed => 0,
            Setting::Primed => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Setting::Unprimed),
            1 => Some(Setting::Primed),
            _ => None,
        }
    }
}

impl From<Setting> for u8 {
    fn from(s: Setting) -> u8 {
        s.index() as u8
    }
}

impl TryFrom<u8> for Setting {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Setting::from_index(v as usize).ok_or_else(|| format!("setting must be 0 or 1, got {v}"))
    }
}

/// CHSH sign of a setting pair: −1 for (primed, primed), +1 otherwise.
pub fn chsh_sign(a: Setting, b: Setting) -> f64 {
    if a == Setting::Primed && b == Setting::Primed {
        -1.0
    } else {
        1.0
    }
}

/// All four setting pairs in the order (0,0), (0,1), (1,0), (1,1).
pub fn setting_pairs() -> [(Setting, Setting); 4] {
    [
        (Setting::Unprimed, Setting::Unprimed),
        (Setting::Unprimed, Setting::Primed),
        (Setting::Primed, Setting::Unprimed),
        (Setting::Primed, Setting::Primed),
    ]
}
