//! Name screening against watchlists: terrorism, money laundering,
//! politically exposed persons, negative press. Lists hold pre-normalized
//! names; matching escalates exact → normalized → fuzzy (edit distance 1,
//! only with a corroborating date of birth).

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ListKind {
    Terrorism,
    Aml,
    Pep,
    NegativePress,
}

impl ListKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ListKind::Terrorism => "terrorism",
            ListKind::Aml => "aml",
            ListKind::Pep => "pep",
            ListKind::NegativePress => "negative_press",
        }
    }

    pub fn parse(s: &str) -> Option<ListKind> {
        Some(match s {
            "terrorism" => ListKind::Terrorism,
            "aml" => ListKind::Aml,
            "pep" => ListKind::Pep,
            "negative_press" => ListKind::NegativePress,
            _ => return None,
        })
    }

    /// Hits on these lists force rejection regardless of the risk score.
    pub fn is_blocking(self) -> bool {
        matches!(self, ListKind::Terrorism | ListKind::Aml)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreeningEntry {
    pub name: String,
    pub dob: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreeningList {
    pub kind: ListKind,
    pub entries: Vec<ScreeningEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchGrade {
    Exact,
    Normalized,
    Fuzzy,
}

impl MatchGrade {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchGrade::Exact => "exact",
            MatchGrade::Normalized => "normalized",
            MatchGrade::Fuzzy => "fuzzy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreeningHit {
    pub list: ListKind,
    pub entry: String,
    pub grade: MatchGrade,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad screening list line {line}: {reason}")]
pub struct ListParseError {
    pub line: usize,
    pub reason: String,
}

/// Casefold plus diacritic stripping plus whitespace collapsing; the same
/// normalization is applied to list entries at load time.
pub fn normalize_name(name: &str) -> String {
    let stripped: String = name
        .nfd()
        .filter(|c| !unicode_normalization::char::is_combining_mark(*c))
        .collect();
    stripped
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parse the tab-separated list format: `<list_kind>\t<name>\t<dob?>`.
pub fn parse_lists(text: &str) -> Result<Vec<ScreeningList>, ListParseError> {
    let mut lists: Vec<ScreeningList> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let kind_s = parts.next().unwrap_or("");
        let kind = ListKind::parse(kind_s).ok_or_else(|| ListParseError {
            line: i + 1,
            reason: format!("unknown list kind `{kind_s}`"),
        })?;
        let name = parts.next().filter(|s| !s.is_empty()).ok_or(ListParseError {
            line: i + 1,
            reason: "missing name".into(),
        })?;
        let dob = parts.next().filter(|s| !s.is_empty()).map(str::to_string);
        let entry = ScreeningEntry {
            name: normalize_name(name),
            dob,
        };
        match lists.iter_mut().find(|l| l.kind == kind) {
            Some(l) => l.entries.push(entry),
            None => lists.push(ScreeningList {
                kind,
                entries: vec![entry],
            }),
        }
    }
    Ok(lists)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        row[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            row[j] = (prev[j] + 1).min(row[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// Screen a name (and optional date of birth) against the loaded lists.
pub fn name_screen(name: &str, dob: Option<&str>, lists: &[ScreeningList]) -> Vec<ScreeningHit> {
    let normalized = normalize_name(name);
    let mut hits = Vec::new();
    for list in lists {
        for entry in &list.entries {
            let grade = if name == entry.name {
                Some(MatchGrade::Exact)
            } else if normalized == entry.name {
                Some(MatchGrade::Normalized)
            } else if levenshtein(&normalized, &entry.name) <= 1 {
                // fuzzy only counts when a date of birth corroborates it
                match (dob, entry.dob.as_deref()) {
                    (Some(q), Some(e)) if q == e => Some(MatchGrade::Fuzzy),
                    _ => None,
                }
            } else {
                None
            };
            if let Some(grade) = grade {
                hits.push(ScreeningHit {
                    list: list.kind,
                    entry: entry.name.clone(),
                    grade,
                });
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lists() -> Vec<ScreeningList> {
        parse_lists(
            "terrorism\talice muller\t\n\
             pep\tsmith\t1980-05-05\n\
             negative_press\tjonas kahn\t\n",
        )
        .unwrap()
    }

    #[test]
    fn normalized_match_strips_diacritics_and_case() {
        let hits = name_screen("Alice Müller", None, &lists());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].list, ListKind::Terrorism);
        assert_eq!(hits[0].grade, MatchGrade::Normalized);
    }

    #[test]
    fn exact_match_on_already_normalized_input() {
        let hits = name_screen("alice muller", None, &lists());
        assert_eq!(hits[0].grade, MatchGrade::Exact);
    }

    #[test]
    fn fuzzy_needs_matching_dob() {
        let hits = name_screen("Smyth", Some("1980-05-05"), &lists());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].grade, MatchGrade::Fuzzy);
        assert_eq!(hits[0].list, ListKind::Pep);

        assert!(name_screen("Smyth", Some("1999-01-01"), &lists()).is_empty());
        assert!(name_screen("Smyth", None, &lists()).is_empty());
    }

    #[test]
    fn distance_beyond_one_never_hits() {
        assert!(name_screen("Smithers", Some("1980-05-05"), &lists()).is_empty());
    }

    #[test]
    fn levenshtein_matches_recursive_oracle() {
        fn oracle(a: &[char], b: &[char]) -> usize {
            if a.is_empty() {
                return b.len();
            }
            if b.is_empty() {
                return a.len();
            }
            let cost = usize::from(a[0] != b[0]);
            (oracle(&a[1..], b) + 1)
                .min(oracle(a, &b[1..]) + 1)
                .min(oracle(&a[1..], &b[1..]) + cost)
        }
        let words = ["smith", "smyth", "smithers", "", "a", "ab", "muller"];
        for a in words {
            for b in words {
                let ac: Vec<char> = a.chars().collect();
                let bc: Vec<char> = b.chars().collect();
                assert_eq!(levenshtein(a, b), oracle(&ac, &bc), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn whitespace_collapsed_by_normalization() {
        assert_eq!(normalize_name("  Alice   MÜLLER "), "alice muller");
    }

    #[test]
    fn bad_list_kind_rejected() {
        let err = parse_lists("watch\tname\t\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
