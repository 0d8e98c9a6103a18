//! Stack identity as recorded in the dataset manifest.

use alloc::string::String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    PureTest,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::PureTest => "pure_test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "pure_test" => Some(Split::PureTest),
            _ => None,
        }
    }
}

/// One stack of 2D slices and where its files live.
#[derive(Debug, Clone, PartialEq)]
pub struct StackRecord {
    pub stack_id: String,
    pub subject_id: String,
    pub session_id: String,
    pub run_id: String,
    pub scanner_id: String,
    pub site_id: String,
    pub split: Split,
    pub image_path: String,
    pub mask_path: Option<String>,
    pub labelmap_path: Option<String>,
    pub tr_ms: Option<f64>,
    pub te_ms: Option<f64>,
}

impl StackRecord {
    /// A record with only identity fields set; paths empty.
    pub fn new(stack_id: &str, subject_id: &str, scanner_id: &str, site_id: &str) -> Self {
        Self {
            stack_id: stack_id.into(),
            subject_id: subject_id.into(),
            session_id: "1".into(),
            run_id: "1".into(),
            scanner_id: scanner_id.into(),
            site_id: site_id.into(),
            split: Split::Train,
            image_path: String::new(),
            mask_path: None,
            labelmap_path: None,
            tr_ms: None,
            te_ms: None,
        }
    }
}
