//! Train/val/test partitions for the three evaluation protocols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// View 0 is the egocentric camera; every other view id is a static allocentric camera.
pub const EGOCENTRIC_VIEW: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// Allocentric views, held-out sequences per object.
    P1,
    /// Egocentric view, held-out sequences per object.
    P2,
    /// Allocentric views, held-out subjects.
    P3,
}

impl Protocol {
    pub fn uses_view(self, view: u32) -> bool {
        match self {
            Protocol::P2 => view == EGOCENTRIC_VIEW,
            Protocol::P1 | Protocol::P3 => view != EGOCENTRIC_VIEW,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(Protocol::P1),
            "P2" => Ok(Protocol::P2),
            "P3" => Ok(Protocol::P3),
            _ => Err(Error::Parameter(format!("unknown protocol '{s}' (expected P1, P2 or P3)"))),
        }
    }
}

/// Identifies one (sequence, view) recording.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub sequence_id: String,
    pub subject: String,
    pub object: String,
    pub view: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Val,
    Test,
}

/// Indices into the record list, per role. Records whose view the protocol
/// does not use are listed in `excluded`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub excluded: Vec<usize>,
}

impl Split {
    pub fn role(&self, role: SplitRole) -> &[usize] {
        match role {
            SplitRole::Train => &self.train,
            SplitRole::Val => &self.val,
            SplitRole::Test => &self.test,
        }
    }
}

/// Held-out sequences per object: the last sorted sequence is test, the one
/// before it val, the rest train. With two sequences there is no val; a lone
/// sequence is test.
fn sequence_roles(sorted: &[&str]) -> Vec<SplitRole> {
    let n = sorted.len();
    (0..n)
        .map(|i| match n {
            1 => SplitRole::Test,
            2 => [SplitRole::Train, SplitRole::Test][i],
            _ if i == n - 1 => SplitRole::Test,
            _ if i == n - 2 => SplitRole::Val,
            _ => SplitRole::Train,
        })
        .collect()
}

/// Held-out subjects: the last two sorted subjects are test and the one
/// before them val, which gives 6/1/2 for nine subjects. Fewer than four
/// subjects shrink val first, then train.
fn subject_roles(n: usize) -> Vec<SplitRole> {
    (0..n)
        .map(|i| match n {
            1 => SplitRole::Test,
            2 => [SplitRole::Train, SplitRole::Test][i],
            3 => [SplitRole::Train, SplitRole::Val, SplitRole::Test][i],
            _ if i >= n - 2 => SplitRole::Test,
            _ if i == n - 3 => SplitRole::Val,
            _ => SplitRole::Train,
        })
        .collect()
}

/// Assigns every record to train, val, test or excluded. All views of a
/// sequence share its role, so no sequence spans two roles.
pub fn split(protocol: Protocol, records: &[SequenceMeta]) -> Result<Split> {
    let mut seq_info: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for r in records {
        let entry = seq_info.entry(&r.sequence_id).or_insert((&r.subject, &r.object));
        if *entry != (r.subject.as_str(), r.object.as_str()) {
            return Err(Error::Split(format!(
                "sequence '{}' is listed with conflicting subject/object",
                r.sequence_id
            )));
        }
    }
    let mut role_of: BTreeMap<&str, SplitRole> = BTreeMap::new();
    match protocol {
        Protocol::P1 | Protocol::P2 => {
            let mut by_object: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for r in records.iter().filter(|r| protocol.uses_view(r.view)) {
                by_object.entry(&r.object).or_default().push(&r.sequence_id);
            }
            for seqs in by_object.values_mut() {
                seqs.sort_unstable();
                seqs.dedup();
                for (s, role) in seqs.iter().zip(sequence_roles(seqs)) {
                    role_of.insert(s, role);
                }
            }
        }
        Protocol::P3 => {
            let subjects: BTreeSet<&str> = records
                .iter()
                .filter(|r| protocol.uses_view(r.view))
                .map(|r| r.subject.as_str())
                .collect();
            let subjects: Vec<&str> = subjects.into_iter().collect();
            let roles: BTreeMap<&str, SplitRole> = subjects.iter().copied().zip(subject_roles(subjects.len())).collect();
            for (seq, (subject, _)) in &seq_info {
                if let Some(&role) = roles.get(subject) {
                    role_of.insert(seq, role);
                }
            }
        }
    }
    let mut out = Split::default();
    for (i, r) in records.iter().enumerate() {
        if !protocol.uses_view(r.view) {
            out.excluded.push(i);
            continue;
        }
        match role_of[r.sequence_id.as_str()] {
            SplitRole::Train => out.train.push(i),
            SplitRole::Val => out.val.push(i),
            SplitRole::Test => out.test.push(i),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn meta(seq: &str, subject: &str, object: &str, view: u32) -> SequenceMeta {
        SequenceMeta {
            sequence_id: seq.into(),
            subject: subject.into(),
            object: object.into(),
            view,
        }
    }

    #[test]
    fn nine_subjects_split_six_one_two() {
        let records: Vec<_> = (1..=9).map(|s| meta(&format!("s{s}-box"), &format!("s{s:02}"), "box", 1)).collect();
        let sp = split(Protocol::P3, &records).unwrap();
        assert_eq!((sp.train.len(), sp.val.len(), sp.test.len()), (6, 1, 2));
        assert_eq!(sp.test, vec![7, 8]);
        assert_eq!(sp.val, vec![6]);
    }

    #[test]
    fn views_follow_protocol() {
        let records: Vec<_> = (0..9).map(|v| meta("a", "s1", "box", v)).collect();
        let p1 = split(Protocol::P1, &records).unwrap();
        assert_eq!(p1.test, (1..9).collect::<Vec<_>>());
        assert_eq!(p1.excluded, vec![0]);
        let p2 = split(Protocol::P2, &records).unwrap();
        assert_eq!(p2.test, vec![0]);
        assert_eq!(p2.excluded.len(), 8);
    }

    #[test]
    fn sequences_held_out_per_object() {
        let records = vec![
            meta("c", "s1", "box", 1),
            meta("a", "s1", "box", 1),
            meta("b", "s2", "box", 2),
            meta("x", "s1", "flap", 1),
            meta("y", "s2", "flap", 1),
        ];
        let sp = split(Protocol::P1, &records).unwrap();
        assert_eq!(sp.train, vec![1, 3]);
        assert_eq!(sp.val, vec![2]);
        assert_eq!(sp.test, vec![0, 4]);
    }

    #[test]
    fn conflicting_metadata_is_rejected() {
        let records = vec![meta("a", "s1", "box", 1), meta("a", "s2", "box", 2)];
        assert!(matches!(split(Protocol::P1, &records), Err(Error::Split(_))));
    }

    #[test]
    fn protocol_parsing() {
        assert_eq!("p2".parse::<Protocol>().unwrap(), Protocol::P2);
        assert!("P4".parse::<Protocol>().is_err());
    }
}
