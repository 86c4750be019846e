//! JSONL ingest and serialization.
//!
//! One news item per line:
//! `{"id": str, "label": -1|1|null, "published_at": str|null,
//!   "posts": [{"post_id": str, "created_at": str|null, "hashtags": [str]}]}`

use std::collections::HashMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use log::warn;
use serde::{Deserialize, Serialize};

use super::{normalize_hashtag, Corpus, Label, NewsItem, Post};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ParseOptions {
    /// Skip malformed lines instead of failing. Duplicate ids and invalid
    /// labels stay fatal.
    pub lenient: bool,
    /// Allowed amount by which a post may precede its news publish time
    /// before a warning is counted.
    pub clock_skew_seconds: i64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            lenient: false,
            clock_skew_seconds: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ParseReport {
    pub lines: usize,
    pub news: usize,
    pub labeled: usize,
    pub posts: usize,
    pub hashtags: usize,
    /// `(line number, reason)` for each malformed line skipped in lenient mode.
    pub skipped: Vec<(usize, String)>,
    pub rejected_hashtags: usize,
    pub clock_skew_warnings: usize,
}

#[derive(Serialize, Deserialize)]
struct RawPost {
    post_id: String,
    #[serde(default)]
    created_at: Option<String>,
    #[serde(default)]
    hashtags: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawNews {
    id: String,
    #[serde(default)]
    label: Option<serde_json::Value>,
    #[serde(default)]
    published_at: Option<String>,
    #[serde(default)]
    posts: Vec<RawPost>,
}

pub(crate) fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
        .ok()
        .map(|n| n.and_utc())
}

pub(crate) fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

enum LineError {
    Malformed(String),
    Fatal(Error),
}

fn parse_label(line: usize, value: Option<serde_json::Value>) -> Result<Option<Label>> {
    match value {
        None | Some(serde_json::Value::Null) => Ok(None),
        Some(v) => v
            .as_i64()
            .and_then(Label::from_sign)
            .map(Some)
            .ok_or_else(|| Error::InvalidLabel {
                line,
                value: v.to_string(),
            }),
    }
}

fn convert(
    line: usize,
    raw: RawNews,
    opts: &ParseOptions,
    report: &mut ParseReport,
) -> std::result::Result<NewsItem, LineError> {
    if raw.id.is_empty() {
        return Err(LineError::Malformed("empty news id".into()));
    }
    let label = parse_label(line, raw.label).map_err(LineError::Fatal)?;
    let published_at = match raw.published_at.as_deref() {
        None => None,
        Some(s) => Some(
            parse_timestamp(s)
                .ok_or_else(|| LineError::Malformed(format!("bad published_at {s:?}")))?,
        ),
    };
    let mut posts = Vec::with_capacity(raw.posts.len());
    for rp in raw.posts {
        let created_at = match rp.created_at.as_deref() {
            None => None,
            Some(s) => Some(
                parse_timestamp(s)
                    .ok_or_else(|| LineError::Malformed(format!("bad created_at {s:?}")))?,
            ),
        };
        if let (Some(p), Some(c)) = (published_at, created_at) {
            if (p - c).num_seconds() > opts.clock_skew_seconds {
                report.clock_skew_warnings += 1;
                warn!(
                    "line {line}: post {} created {} before publish time {}",
                    rp.post_id,
                    format_timestamp(&c),
                    format_timestamp(&p)
                );
            }
        }
        let mut tags = Vec::with_capacity(rp.hashtags.len());
        for raw_tag in &rp.hashtags {
            match normalize_hashtag(raw_tag) {
                Some(t) => tags.push(t),
                None => {
                    report.rejected_hashtags += 1;
                    warn!("line {line}: dropped hashtag token {raw_tag:?}");
                }
            }
        }
        posts.push(Post::new(rp.post_id, created_at, tags));
    }
    Ok(NewsItem {
        id: raw.id,
        label,
        published_at,
        posts,
    })
}

/// Reads a JSONL news stream into a validated corpus.
pub fn parse_corpus<R: BufRead>(source: R, opts: &ParseOptions) -> Result<(Corpus, ParseReport)> {
    let mut report = ParseReport::default();
    let mut news = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        report.lines = lineno;
        if line.trim().is_empty() {
            continue;
        }
        let outcome = serde_json::from_str::<RawNews>(&line)
            .map_err(|e| LineError::Malformed(e.to_string()))
            .and_then(|raw| convert(lineno, raw, opts, &mut report));
        let item = match outcome {
            Ok(item) => item,
            Err(LineError::Fatal(e)) => return Err(e),
            Err(LineError::Malformed(message)) => {
                if opts.lenient {
                    warn!("line {lineno}: skipping malformed record: {message}");
                    report.skipped.push((lineno, message));
                    continue;
                }
                return Err(Error::MalformedRecord {
                    line: lineno,
                    message,
                });
            }
        };
        if seen.insert(item.id.clone(), lineno).is_some() {
            return Err(Error::DuplicateNewsId {
                line: lineno,
                id: item.id,
            });
        }
        news.push(item);
    }
    let corpus = Corpus::new(news)?;
    report.news = corpus.len();
    report.labeled = corpus.labeled_count();
    report.posts = corpus.post_count();
    report.hashtags = corpus.vocabulary().len();
    Ok((corpus, report))
}

/// Writes a corpus as JSONL. Output is a pure function of the corpus.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut sink: W) -> Result<()> {
    for item in corpus.news() {
        let raw = RawNews {
            id: item.id.clone(),
            label: Some(match item.label {
                Some(l) => serde_json::Value::from(l.sign()),
                None => serde_json::Value::Null,
            }),
            published_at: item.published_at.as_ref().map(format_timestamp),
            posts: item
                .posts
                .iter()
                .map(|p| RawPost {
                    post_id: p.post_id.clone(),
                    created_at: p.created_at.as_ref().map(format_timestamp),
                    hashtags: p.hashtags().to_vec(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut sink, &raw)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}
