//! Automation-viability questions and their three-level answers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Identifier of one of the nine viability questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct QuestionId(u8);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionError {
    #[error("question id {0} is outside 1..9")]
    OutOfRange(i64),
    #[error("unknown answer {0:?} (expected \"L\", \"M\" or \"H\")")]
    UnknownAnswer(String),
}

impl QuestionId {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 9;

    pub fn new(value: u8) -> Result<Self, QuestionError> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(QuestionId(value))
        } else {
            Err(QuestionError::OutOfRange(value as i64))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = QuestionId> {
        (Self::MIN..=Self::MAX).map(QuestionId)
    }

    pub fn topic(self) -> &'static str {
        QUESTIONS[(self.0 - 1) as usize].0
    }

    pub fn text(self) -> &'static str {
        QUESTIONS[(self.0 - 1) as usize].1
    }
}

impl TryFrom<u8> for QuestionId {
    type Error = QuestionError;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        QuestionId::new(value)
    }
}

impl TryFrom<i64> for QuestionId {
    type Error = QuestionError;
    fn try_from(value: i64) -> Result<Self, Self::Error> {
        u8::try_from(value)
            .map_err(|_| QuestionError::OutOfRange(value))
            .and_then(QuestionId::new)
    }
}

impl From<QuestionId> for u8 {
    fn from(q: QuestionId) -> u8 {
        q.0
    }
}

impl FromStr for QuestionId {
    type Err = QuestionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let value: i64 = s
            .trim()
            .parse()
            .map_err(|_| QuestionError::OutOfRange(-1))?;
        QuestionId::try_from(value)
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Topic and question text keyed by identifier (index = id - 1).
const QUESTIONS: [(&str, &str); 9] = [
    ("Frequency", "How many times is this test supposed to be executed?"),
    ("Reuse", "Can this test or parts of it be reused in other tests?"),
    ("Relevance", "How would you describe the importance of this test case?"),
    ("Automation effort", "Does this test take a lot of effort to be deployed?"),
    (
        "Resources",
        "How many members of your team should be allocated or how expensive is the equipment needed during this test's manual execution?",
    ),
    (
        "Manual complexity",
        "Is this test difficult to be executed manually? Does it have any embedded confidential information?",
    ),
    (
        "Automation tool",
        "How would you describe the reliability of the automation tool to be used?",
    ),
    ("Porting", "How portable is this test?"),
    ("Execution effort", "Does this require a lot of effort to be executed manually?"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Answer {
    Low,
    Medium,
    High,
}

impl Answer {
    pub const ALL: [Answer; 3] = [Answer::High, Answer::Medium, Answer::Low];

    pub fn letter(self) -> &'static str {
        match self {
            Answer::Low => "L",
            Answer::Medium => "M",
            Answer::High => "H",
        }
    }
}

impl FromStr for Answer {
    type Err = QuestionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L" => Ok(Answer::Low),
            "M" => Ok(Answer::Medium),
            "H" => Ok(Answer::High),
            other => Err(QuestionError::UnknownAnswer(other.to_string())),
        }
    }
}

impl TryFrom<String> for Answer {
    type Error = QuestionError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Answer> for String {
    fn from(a: Answer) -> String {
        a.letter().to_string()
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn question_bounds() {
        assert!(QuestionId::new(0).is_err());
        assert!(QuestionId::new(10).is_err());
        assert_eq!(QuestionId::all().count(), 9);
        assert_eq!("7".parse::<QuestionId>().unwrap().get(), 7);
        assert!("x".parse::<QuestionId>().is_err());
    }

    #[test]
    fn answer_letters() {
        for a in Answer::ALL {
            assert_eq!(a.letter().parse::<Answer>().unwrap(), a);
        }
        assert!("h".parse::<Answer>().is_err());
        assert!("Y".parse::<Answer>().is_err());
    }

    #[test]
    fn texts_are_keyed_by_id() {
        let q7 = QuestionId::new(7).unwrap();
        assert_eq!(q7.topic(), "Automation tool");
        assert!(q7.text().contains("reliability"));
    }
}
