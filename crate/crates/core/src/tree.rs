//! Data-driven automation-viability decision trees.
//!
//! A tree is a nest of question nodes, each with exactly one branch per
//! answer (`H`, `M`, `L`), ending in `automate` / `manual` leaves. Trees are
//! read from JSON documents:
//!
//! ```json
//! {"label": "...", "comment": "...",
//!  "root": {"question": 1, "branches": {"H": {"decision": "automate"}, "M": ..., "L": ...}}}
//! ```
//!
//! Classification walks from the root and only looks up the answers of the
//! questions it actually visits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::question::{Answer, QuestionId};
use crate::suite::{Answers, TestSuite};

const DEFAULT_TREE: &str = include_str!("../data/default_tree.json");

/// Upper bound on question nodes along any root-to-leaf path.
pub const MAX_DEPTH: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Automate,
    Manual,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Automate => "automate",
            Decision::Manual => "manual",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Automate => "Automate",
            Decision::Manual => "Manual",
        })
    }
}

pub type PathStep = (QuestionId, Answer);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Question {
        question: QuestionId,
        branches: Box<Branches>,
    },
    Leaf(Decision),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branches {
    pub high: TreeNode,
    pub medium: TreeNode,
    pub low: TreeNode,
}

impl Branches {
    pub fn get(&self, answer: Answer) -> &TreeNode {
        match answer {
            Answer::High => &self.high,
            Answer::Medium => &self.medium,
            Answer::Low => &self.low,
        }
    }
}

impl TreeNode {
    pub fn question(question: QuestionId, high: TreeNode, medium: TreeNode, low: TreeNode) -> Self {
        TreeNode::Question {
            question,
            branches: Box::new(Branches { high, medium, low }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub label: String,
    pub comment: String,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub decision: Decision,
    pub path: Vec<PathStep>,
}

impl Classification {
    /// `1:L → 2:M → 3:H → 7:H`
    pub fn path_string(&self) -> String {
        self.path
            .iter()
            .map(|(q, a)| format!("{q}:{a}"))
            .collect::<Vec<_>>()
            .join(" → ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, thiserror::Error)]
#[error("missing answer for question {0}")]
pub struct MissingAnswer(pub QuestionId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RepeatedQuestion { question: QuestionId, path: Vec<PathStep> },
    TooDeep { path: Vec<PathStep> },
    NoAutomateLeaf,
    NoManualLeaf,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RepeatedQuestion { question, path } => write!(
                f,
                "question {question} repeats on path {}",
                render_path(path)
            ),
            Violation::TooDeep { path } => write!(
                f,
                "path {} is deeper than {MAX_DEPTH} questions",
                render_path(path)
            ),
            Violation::NoAutomateLeaf => f.write_str("no automate leaf is reachable"),
            Violation::NoManualLeaf => f.write_str("no manual leaf is reachable"),
        }
    }
}

fn render_path(path: &[PathStep]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    path.iter()
        .map(|(q, a)| format!("{q}:{a}"))
        .collect::<Vec<_>>()
        .join(" → ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Whether each of the nine questions appears anywhere in the tree.
    pub reachable: BTreeMap<QuestionId, bool>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn unreachable(&self) -> Vec<QuestionId> {
        self.reachable
            .iter()
            .filter(|(_, r)| !**r)
            .map(|(q, _)| *q)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("malformed tree document: {0}")]
    Malformed(String),
    #[error("{node}: {message}")]
    Shape { node: String, message: String },
    #[error("{node}: missing branch {letter:?}")]
    MissingBranch { node: String, letter: &'static str },
    #[error("{node}: question id {value} is outside 1..9")]
    QuestionOutOfRange { node: String, value: String },
    #[error("{node}: leaf decision {value:?} is not \"automate\" or \"manual\"")]
    UnknownDecision { node: String, value: String },
    #[error("invalid tree: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
}

// ---------------------------------------------------------------------------
// Classification

pub fn classify(tree: &DecisionTree, answers: &Answers) -> Result<Classification, MissingAnswer> {
    classify_with(tree, |q| answers.get(&q).copied())
}

/// Walks the tree asking `lookup` only for questions on the traversed path.
pub fn classify_with(
    tree: &DecisionTree,
    mut lookup: impl FnMut(QuestionId) -> Option<Answer>,
) -> Result<Classification, MissingAnswer> {
    let mut node = &tree.root;
    let mut path = Vec::new();
    loop {
        match node {
            TreeNode::Leaf(decision) => {
                return Ok(Classification {
                    decision: *decision,
                    path,
                })
            }
            TreeNode::Question { question, branches } => {
                let answer = lookup(*question).ok_or(MissingAnswer(*question))?;
                path.push((*question, answer));
                node = branches.get(answer);
            }
        }
    }
}

/// Classification of every active test, in suite order.
pub fn classify_suite(
    tree: &DecisionTree,
    suite: &TestSuite,
) -> IndexMap<String, Result<Classification, MissingAnswer>> {
    suite
        .tests
        .iter()
        .filter(|t| t.is_active())
        .map(|t| (t.id.clone(), classify(tree, &t.answers)))
        .collect()
}

// ---------------------------------------------------------------------------
// Structure

impl DecisionTree {
    /// Every root-to-leaf path with its decision, H before M before L.
    pub fn leaves(&self) -> Vec<(Vec<PathStep>, Decision)> {
        let mut out = Vec::new();
        collect_leaves(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Node reached by following `prefix` from the root.
    pub fn subtree(&self, prefix: &[PathStep]) -> Option<&TreeNode> {
        let mut node = &self.root;
        for (q, a) in prefix {
            match node {
                TreeNode::Question { question, branches } if question == q => {
                    node = branches.get(*a);
                }
                _ => return None,
            }
        }
        Some(node)
    }

    /// Question ids appearing anywhere below `prefix` (inclusive).
    pub fn questions_under(&self, prefix: &[PathStep]) -> Option<BTreeSet<QuestionId>> {
        let node = self.subtree(prefix)?;
        let mut out = BTreeSet::new();
        collect_questions(node, &mut out);
        Some(out)
    }
}

fn collect_leaves(node: &TreeNode, path: &mut Vec<PathStep>, out: &mut Vec<(Vec<PathStep>, Decision)>) {
    match node {
        TreeNode::Leaf(d) => out.push((path.clone(), *d)),
        TreeNode::Question { question, branches } => {
            for a in Answer::ALL {
                path.push((*question, a));
                collect_leaves(branches.get(a), path, out);
                path.pop();
            }
        }
    }
}

fn collect_questions(node: &TreeNode, out: &mut BTreeSet<QuestionId>) {
    if let TreeNode::Question { question, branches } = node {
        out.insert(*question);
        for a in Answer::ALL {
            collect_questions(branches.get(a), out);
        }
    }
}

/// Lists every structural violation; an empty list means the tree is valid.
pub fn validate_tree(tree: &DecisionTree) -> ValidationReport {
    let mut violations = Vec::new();
    let mut has_automate = false;
    let mut has_manual = false;
    walk_validate(
        &tree.root,
        &mut Vec::new(),
        &mut violations,
        &mut has_automate,
        &mut has_manual,
    );
    if !has_automate {
        violations.push(Violation::NoAutomateLeaf);
    }
    if !has_manual {
        violations.push(Violation::NoManualLeaf);
    }
    let mut present = BTreeSet::new();
    collect_questions(&tree.root, &mut present);
    let reachable = QuestionId::all().map(|q| (q, present.contains(&q))).collect();
    ValidationReport {
        violations,
        reachable,
    }
}

fn walk_validate(
    node: &TreeNode,
    path: &mut Vec<PathStep>,
    violations: &mut Vec<Violation>,
    has_automate: &mut bool,
    has_manual: &mut bool,
) {
    match node {
        TreeNode::Leaf(Decision::Automate) => *has_automate = true,
        TreeNode::Leaf(Decision::Manual) => *has_manual = true,
        TreeNode::Question { question, branches } => {
            if path.iter().any(|(q, _)| q == question) {
                // report once per offending node, not once per leaf below it
                violations.push(Violation::RepeatedQuestion {
                    question: *question,
                    path: path.clone(),
                });
            }
            if path.len() == MAX_DEPTH {
                violations.push(Violation::TooDeep { path: path.clone() });
                return;
            }
            for a in Answer::ALL {
                path.push((*question, a));
                walk_validate(branches.get(a), path, violations, has_automate, has_manual);
                path.pop();
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Documents

/// The shipped stand-in tree.
pub fn default_tree() -> DecisionTree {
    parse_tree(DEFAULT_TREE).expect("shipped default tree is valid")
}

pub fn default_tree_document() -> &'static str {
    DEFAULT_TREE
}

/// Parses and validates a tree document.
pub fn parse_tree(document: &str) -> Result<DecisionTree, TreeError> {
    let tree = parse_tree_unchecked(document)?;
    let report = validate_tree(&tree);
    if report.is_valid() {
        Ok(tree)
    } else {
        Err(TreeError::Invalid(report))
    }
}

/// Parses a tree document, checking syntax and branch totality only.
pub fn parse_tree_unchecked(document: &str) -> Result<DecisionTree, TreeError> {
    let value: Value =
        serde_json::from_str(document).map_err(|e| TreeError::Malformed(e.to_string()))?;
    tree_from_value_unchecked(&value)
}

pub fn tree_from_value(value: &Value) -> Result<DecisionTree, TreeError> {
    let tree = tree_from_value_unchecked(value)?;
    let report = validate_tree(&tree);
    if report.is_valid() {
        Ok(tree)
    } else {
        Err(TreeError::Invalid(report))
    }
}

fn tree_from_value_unchecked(value: &Value) -> Result<DecisionTree, TreeError> {
    let shape = |message: &str| TreeError::Shape {
        node: "document".into(),
        message: message.into(),
    };
    let map = value.as_object().ok_or_else(|| shape("expected an object"))?;
    if let Some(key) = map.keys().find(|k| !["label", "comment", "root"].contains(&k.as_str())) {
        return Err(shape(&format!("unknown key {key:?}")));
    }
    let text = |key: &str| -> Result<String, TreeError> {
        match map.get(key) {
            None => Ok(String::new()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(shape(&format!("{key} must be a string"))),
        }
    };
    let root = map.get("root").ok_or_else(|| shape("missing root"))?;
    Ok(DecisionTree {
        label: text("label")?,
        comment: text("comment")?,
        root: parse_node(root, "root")?,
    })
}

fn parse_node(value: &Value, location: &str) -> Result<TreeNode, TreeError> {
    let shape = |message: String| TreeError::Shape {
        node: location.to_string(),
        message,
    };
    let map = value
        .as_object()
        .ok_or_else(|| shape("expected an object".into()))?;
    if let Some(decision) = map.get("decision") {
        if map.len() != 1 {
            return Err(shape("a leaf carries only \"decision\"".into()));
        }
        return match decision.as_str() {
            Some("automate") => Ok(TreeNode::Leaf(Decision::Automate)),
            Some("manual") => Ok(TreeNode::Leaf(Decision::Manual)),
            _ => Err(TreeError::UnknownDecision {
                node: location.to_string(),
                value: decision.to_string().trim_matches('"').to_string(),
            }),
        };
    }
    if let Some(key) = map.keys().find(|k| !["question", "branches"].contains(&k.as_str())) {
        return Err(shape(format!("unknown key {key:?}")));
    }
    let raw_q = map
        .get("question")
        .ok_or_else(|| shape("node needs \"question\" or \"decision\"".into()))?;
    let question = raw_q
        .as_i64()
        .and_then(|v| QuestionId::try_from(v).ok())
        .ok_or_else(|| TreeError::QuestionOutOfRange {
            node: location.to_string(),
            value: raw_q.to_string(),
        })?;
    let here = format!("{location} (question {question})");
    let branches = map
        .get("branches")
        .and_then(Value::as_object)
        .ok_or_else(|| TreeError::Shape {
            node: here.clone(),
            message: "missing branches object".into(),
        })?;
    if let Some(key) = branches.keys().find(|k| !["H", "M", "L"].contains(&k.as_str())) {
        return Err(TreeError::Shape {
            node: here,
            message: format!("unknown branch letter {key:?}"),
        });
    }
    let child = |letter: &'static str| -> Result<TreeNode, TreeError> {
        let v = branches.get(letter).ok_or_else(|| TreeError::MissingBranch {
            node: here.clone(),
            letter,
        })?;
        parse_node(v, &format!("{location}/{question}:{letter}"))
    };
    let high = child("H")?;
    let medium = child("M")?;
    let low = child("L")?;
    Ok(TreeNode::question(question, high, medium, low))
}

pub fn tree_to_value(tree: &DecisionTree) -> Value {
    let mut m = Map::new();
    m.insert("label".into(), Value::String(tree.label.clone()));
    m.insert("comment".into(), Value::String(tree.comment.clone()));
    m.insert("root".into(), node_to_value(&tree.root));
    Value::Object(m)
}

fn node_to_value(node: &TreeNode) -> Value {
    let mut m = Map::new();
    match node {
        TreeNode::Leaf(d) => {
            m.insert("decision".into(), Value::String(d.as_str().into()));
        }
        TreeNode::Question { question, branches } => {
            m.insert("question".into(), Value::from(question.get()));
            let mut b = Map::new();
            for a in Answer::ALL {
                b.insert(a.letter().into(), node_to_value(branches.get(a)));
            }
            m.insert("branches".into(), Value::Object(b));
        }
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    fn q(n: u8) -> QuestionId {
        QuestionId::new(n).unwrap()
    }

    fn answers(pairs: &[(u8, Answer)]) -> Answers {
        pairs.iter().map(|(n, a)| (q(*n), *a)).collect()
    }

    use Answer::{High as H, Low as L, Medium as M};

    #[test]
    fn default_tree_worked_example() {
        let tree = default_tree();
        let c = classify(&tree, &answers(&[(1, L), (2, M), (3, H), (7, H)])).unwrap();
        assert_eq!(c.decision, Decision::Automate);
        assert_eq!(c.path, vec![(q(1), L), (q(2), M), (q(3), H), (q(7), H)]);
        assert_eq!(c.path_string(), "1:L → 2:M → 3:H → 7:H");
    }

    #[test]
    fn truncated_answers_report_missing_q7() {
        let tree = default_tree();
        assert_eq!(
            classify(&tree, &answers(&[(1, L), (2, M), (3, H)])),
            Err(MissingAnswer(q(7)))
        );
    }

    #[test]
    fn default_tree_structure() {
        let tree = default_tree();
        let report = validate_tree(&tree);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert!(report.unreachable().is_empty());
        match &tree.root {
            TreeNode::Question { question, .. } => assert_eq!(*question, q(1)),
            _ => panic!("root must be a question"),
        }
        let expect_q = |prefix: &[PathStep], want: u8| match tree.subtree(prefix) {
            Some(TreeNode::Question { question, .. }) => assert_eq!(*question, q(want)),
            other => panic!("{prefix:?}: {other:?}"),
        };
        expect_q(&[(q(1), L)], 2);
        expect_q(&[(q(1), L), (q(2), M)], 3);
        expect_q(&[(q(1), L), (q(2), M), (q(3), H)], 7);
        assert_eq!(
            tree.subtree(&[(q(1), L), (q(2), M), (q(3), H), (q(7), H)]),
            Some(&TreeNode::Leaf(Decision::Automate))
        );
        let under = tree.questions_under(&[(q(1), L), (q(2), L)]).unwrap();
        assert!(!under.contains(&q(4)));
    }

    #[test]
    fn q4_never_consulted_under_q2_low() {
        let tree = default_tree();
        // every completion of the remaining questions, 4 left unanswered
        let others: Vec<u8> = vec![3, 5, 6, 7, 8, 9];
        let total = 3usize.pow(others.len() as u32);
        for code in 0..total {
            let mut a = answers(&[(1, L), (2, L)]);
            let mut c = code;
            for &n in &others {
                a.insert(q(n), Answer::ALL[c % 3]);
                c /= 3;
            }
            let res = classify(&tree, &a);
            assert_ne!(res, Err(MissingAnswer(q(4))));
            assert!(res.is_ok());
        }
    }

    #[test]
    fn lookups_are_exactly_the_path() {
        let tree = default_tree();
        let all: Answers = QuestionId::all().map(|id| (id, M)).collect();
        let seen = RefCell::new(Vec::new());
        let c = classify_with(&tree, |id| {
            seen.borrow_mut().push(id);
            all.get(&id).copied()
        })
        .unwrap();
        let path_qs: Vec<QuestionId> = c.path.iter().map(|(id, _)| *id).collect();
        assert_eq!(*seen.borrow(), path_qs);
    }

    #[test]
    fn exhaustive_total_assignments_classify() {
        let tree = default_tree();
        let mut automate = 0;
        for code in 0..3usize.pow(9) {
            let mut c = code;
            let a: Answers = QuestionId::all()
                .map(|id| {
                    let ans = Answer::ALL[c % 3];
                    c /= 3;
                    (id, ans)
                })
                .collect();
            let res = classify(&tree, &a).expect("total assignment always classifies");
            if res.decision == Decision::Automate {
                automate += 1;
            }
            // path soundness
            assert_eq!(tree.subtree(&res.path), Some(&TreeNode::Leaf(res.decision)));
        }
        assert!(automate > 0 && automate < 3usize.pow(9));
    }

    #[test]
    fn rejects_single_automate_leaf() {
        let err = parse_tree(r#"{"label": "x", "root": {"decision": "automate"}}"#).unwrap_err();
        match err {
            TreeError::Invalid(report) => {
                assert_eq!(report.violations, vec![Violation::NoManualLeaf]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_branch_names_letter_and_node() {
        let doc = r#"{"root": {"question": 1, "branches": {
            "H": {"decision": "automate"},
            "M": {"question": 2, "branches": {"H": {"decision": "manual"}, "M": {"decision": "manual"}}},
            "L": {"decision": "manual"}}}}"#;
        match parse_tree(doc).unwrap_err() {
            TreeError::MissingBranch { node, letter } => {
                assert_eq!(letter, "L");
                assert!(node.contains("question 2"), "{node}");
                assert!(node.contains("1:M"), "{node}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_question_and_bad_decision() {
        let doc = r#"{"root": {"question": 10, "branches": {}}}"#;
        assert!(matches!(parse_tree(doc), Err(TreeError::QuestionOutOfRange { .. })));
        let doc = r#"{"root": {"decision": "yes"}}"#;
        assert!(matches!(parse_tree(doc), Err(TreeError::UnknownDecision { .. })));
        assert!(matches!(parse_tree("[1"), Err(TreeError::Malformed(_))));
    }

    #[test]
    fn repeated_question_is_one_violation_citing_path() {
        let a = TreeNode::Leaf(Decision::Automate);
        let m = TreeNode::Leaf(Decision::Manual);
        let inner = TreeNode::question(q(3), a.clone(), m.clone(), m.clone());
        let tree = DecisionTree {
            label: String::new(),
            comment: String::new(),
            root: TreeNode::question(
                q(3),
                TreeNode::question(q(5), inner, a.clone(), m.clone()),
                a.clone(),
                m.clone(),
            ),
        };
        let report = validate_tree(&tree);
        assert_eq!(
            report.violations,
            vec![Violation::RepeatedQuestion {
                question: q(3),
                path: vec![(q(3), H), (q(5), H)],
            }]
        );
        assert!(report.violations[0].to_string().contains("3:H → 5:H"));
    }

    #[test]
    fn unreachable_question_is_a_note_not_a_violation() {
        // Q4 only sits under Q2=H; Q2=L leads straight to leaves
        let a = TreeNode::Leaf(Decision::Automate);
        let m = TreeNode::Leaf(Decision::Manual);
        let tree = DecisionTree {
            label: String::new(),
            comment: String::new(),
            root: TreeNode::question(
                q(2),
                TreeNode::question(q(4), m.clone(), a.clone(), a.clone()),
                a.clone(),
                m.clone(),
            ),
        };
        let report = validate_tree(&tree);
        assert!(report.is_valid());
        assert!(!tree.questions_under(&[(q(2), L)]).unwrap().contains(&q(4)));
        assert!(report.reachable[&q(4)]);
        assert!(!report.reachable[&q(9)]);
        assert!(report.unreachable().contains(&q(9)));
    }

    #[test]
    fn too_deep_is_reported() {
        // a ten-question chain necessarily repeats, and exceeds the depth bound
        let mut node = TreeNode::Leaf(Decision::Automate);
        for n in [1, 2, 3, 4, 5, 6, 7, 8, 9, 1] {
            node = TreeNode::question(q(n), node, TreeNode::Leaf(Decision::Manual), TreeNode::Leaf(Decision::Manual));
        }
        let tree = DecisionTree {
            label: String::new(),
            comment: String::new(),
            root: node,
        };
        let report = validate_tree(&tree);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TooDeep { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RepeatedQuestion { .. })));
    }

    #[test]
    fn document_round_trip() {
        let tree = default_tree();
        let text = serde_json::to_string(&tree_to_value(&tree)).unwrap();
        assert_eq!(parse_tree(&text).unwrap(), tree);
    }
}
