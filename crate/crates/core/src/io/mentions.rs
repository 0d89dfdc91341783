use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::LoadError;

/// Abstract text of a root entity and the entities it mentions, all by
/// external id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionRecord {
    pub root: String,
    pub abstract_text: String,
    pub mentioned: Vec<String>,
    pub category: String,
}

#[derive(Deserialize)]
struct MentionLine {
    root: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    mentions: Vec<String>,
    #[serde(default)]
    category: String,
}

/// Reads line-delimited JSON, one record per non-blank line:
/// `{"root": "Q76", "abstract": "...", "mentions": ["Q30", ...]}`.
pub fn load_mentions(path: &Path) -> Result<Vec<MentionRecord>, LoadError> {
    if !path.exists() {
        return Err(LoadError::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        file: path.to_path_buf(),
        source,
    })?;
    parse_mentions(&text, path)
}

pub fn parse_mentions(text: &str, path: &Path) -> Result<Vec<MentionRecord>, LoadError> {
    let mut out = Vec::new();
    let mut roots = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: MentionLine = serde_json::from_str(line).map_err(|e| LoadError::Syntax {
            file: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if !roots.insert(parsed.root.clone()) {
            return Err(LoadError::DuplicateMentions {
                file: path.to_path_buf(),
                line: line_no,
                root: parsed.root,
            });
        }
        let mut seen = HashSet::new();
        let mentioned = parsed
            .mentions
            .into_iter()
            .filter(|m| seen.insert(m.clone()))
            .collect();
        out.push(MentionRecord {
            root: parsed.root,
            abstract_text: parsed.abstract_text,
            mentioned,
            category: parsed.category,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<MentionRecord>, LoadError> {
        parse_mentions(text, Path::new("mentions.jsonl"))
    }

    #[test]
    fn single_record() {
        let recs = parse(r#"{"root":"Q76","abstract":"Obama was...","mentions":["Q30","Q13133"]}"#).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].mentioned, vec!["Q30", "Q13133"]);
        assert_eq!(recs[0].category, "");
    }

    #[test]
    fn duplicate_mentions_collapse_in_order() {
        let recs = parse(r#"{"root":"Q1","abstract":"","mentions":["Q3","Q2","Q3","Q2","Q4"]}"#).unwrap();
        assert_eq!(recs[0].mentioned, vec!["Q3", "Q2", "Q4"]);
    }

    #[test]
    fn duplicate_root_rejected() {
        let text = "{\"root\":\"Q76\",\"abstract\":\"a\",\"mentions\":[]}\n\n{\"root\":\"Q76\",\"abstract\":\"b\",\"mentions\":[]}\n";
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("duplicate mentions for Q76"), "{err}");
        assert!(matches!(err, LoadError::DuplicateMentions { line: 3, .. }));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\"root\":\"Q1\",\"mentions\":[]}\n{\"root\": oops}\n";
        let err = parse(text).unwrap_err();
        assert!(matches!(err, LoadError::Syntax { line: 2, .. }), "{err}");
    }

    #[test]
    fn order_preserved_and_missing_file() {
        let recs = parse("{\"root\":\"Q2\",\"mentions\":[]}\n{\"root\":\"Q1\",\"mentions\":[],\"category\":\"actor\"}").unwrap();
        assert_eq!(recs[0].root, "Q2");
        assert_eq!(recs[1].category, "actor");
        assert!(matches!(
            load_mentions(Path::new("/nonexistent/m.jsonl")),
            Err(LoadError::MissingFile(_))
        ));
    }
}
