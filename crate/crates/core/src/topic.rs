//! Three-tier topic codes (`6`, `6.238`, `6.238.17`).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    Macro,
    Meso,
    Micro,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Macro, Level::Meso, Level::Micro];

    /// Number of dot-separated segments in a code at this level.
    pub fn segments(self) -> usize {
        match self {
            Level::Macro => 1,
            Level::Meso => 2,
            Level::Micro => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Macro => "macro",
            Level::Meso => "meso",
            Level::Micro => "micro",
        }
    }

    pub fn index(self) -> usize {
        self.segments() - 1
    }

    pub fn coarser(self) -> Option<Level> {
        match self {
            Level::Macro => None,
            Level::Meso => Some(Level::Macro),
            Level::Micro => Some(Level::Meso),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown level {0:?} (expected macro, meso or micro)")]
pub struct ParseLevelError(pub String);

impl FromStr for Level {
    type Err = ParseLevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "macro" => Ok(Level::Macro),
            "meso" => Ok(Level::Meso),
            "micro" => Ok(Level::Micro),
            other => Err(ParseLevelError(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopicError {
    #[error("empty topic code")]
    Empty,
    #[error("topic code {code:?} has {found} segments, {level} codes have {expected}")]
    SegmentCount {
        code: String,
        level: Level,
        expected: usize,
        found: usize,
    },
    #[error("topic code {0:?} has an empty segment")]
    EmptySegment(String),
}

/// A topic code at one level of the classification.
///
/// Ordering compares segments numerically when both parse as integers, so
/// `2` sorts before `10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TopicId {
    level: Level,
    code: String,
}

impl TopicId {
    pub fn new(level: Level, code: &str) -> Result<Self, TopicError> {
        let code = code.trim();
        if code.is_empty() {
            return Err(TopicError::Empty);
        }
        let found = code.split('.').count();
        if found != level.segments() {
            return Err(TopicError::SegmentCount {
                code: code.to_string(),
                level,
                expected: level.segments(),
                found,
            });
        }
        if code.split('.').any(|s| s.trim().is_empty()) {
            return Err(TopicError::EmptySegment(code.to_string()));
        }
        Ok(TopicId {
            level,
            code: code.to_string(),
        })
    }

    /// Infer the level from the number of segments.
    pub fn parse(code: &str) -> Result<Self, TopicError> {
        let code = code.trim();
        if code.is_empty() {
            return Err(TopicError::Empty);
        }
        let level = match code.split('.').count() {
            1 => Level::Macro,
            2 => Level::Meso,
            3 => Level::Micro,
            found => {
                return Err(TopicError::SegmentCount {
                    code: code.to_string(),
                    level: Level::Micro,
                    expected: 3,
                    found,
                })
            }
        };
        TopicId::new(level, code)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    /// The enclosing topic one level up, `None` for macro topics.
    pub fn parent(&self) -> Option<TopicId> {
        let coarser = self.level.coarser()?;
        let cut = self.code.rfind('.')?;
        Some(TopicId {
            level: coarser,
            code: self.code[..cut].to_string(),
        })
    }

    /// The enclosing topic at `level`, which must not be finer than this one.
    pub fn ancestor(&self, level: Level) -> Option<TopicId> {
        if level > self.level {
            return None;
        }
        let code: Vec<&str> = self.code.split('.').take(level.segments()).collect();
        Some(TopicId {
            level,
            code: code.join("."),
        })
    }

    pub fn macro_parent(&self) -> TopicId {
        self.ancestor(Level::Macro).expect("every code has a macro prefix")
    }

    /// Whether `self` is `other` or one of its ancestors.
    pub fn is_prefix_of(&self, other: &TopicId) -> bool {
        other.ancestor(self.level).as_ref() == Some(self)
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

fn cmp_segment(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

impl Ord for TopicId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level.cmp(&other.level).then_with(|| {
            let mut a = self.code.split('.');
            let mut b = other.code.split('.');
            loop {
                match (a.next(), b.next()) {
                    (Some(x), Some(y)) => match cmp_segment(x, y) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    (None, None) => return Ordering::Equal,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(_), None) => return Ordering::Greater,
                }
            }
        })
    }
}

impl PartialOrd for TopicId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
