//! Corpus data model: news items, their posts, and the hashtag vocabulary.

mod jsonl;
mod normalize;
mod split;
pub mod synthetic;
mod window;

use std::collections::HashMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use jsonl::{parse_corpus, write_corpus, ParseOptions, ParseReport};
pub use normalize::normalize_hashtag;
pub use split::{split_corpus, split_ids, Split};
pub(crate) use split::{check_fraction, split_with_rng};
pub use synthetic::{generate_synthetic, SyntheticCorpus, SyntheticParams};
pub use window::{filter_by_time, FilterReport};

/// Ground-truth credibility of a news item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Fake,
    True,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Fake => -1,
            Label::True => 1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign())
    }

    pub fn from_sign(sign: i64) -> Option<Label> {
        match sign {
            -1 => Some(Label::Fake),
            1 => Some(Label::True),
            _ => None,
        }
    }

    /// Decision rule for a news score: strictly positive means true news.
    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::True
        } else {
            Label::Fake
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Fake => Label::True,
            Label::True => Label::Fake,
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.sign()
    }
}

impl TryFrom<i8> for Label {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        Label::from_sign(i64::from(v)).ok_or_else(|| format!("label must be -1 or 1, got {v}"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// One social-media post spreading a news item.
#[derive(Clone, Debug, PartialEq)]
pub struct Post {
    pub post_id: String,
    pub created_at: Option<DateTime<Utc>>,
    hashtags: Vec<String>,
}

impl Post {
    /// Builds a post from already-normalized hashtags. Duplicates are
    /// collapsed keeping first-appearance order.
    pub fn new(
        post_id: impl Into<String>,
        created_at: Option<DateTime<Utc>>,
        hashtags: impl IntoIterator<Item = String>,
    ) -> Self {
        let mut tags: Vec<String> = Vec::new();
        for h in hashtags {
            if !h.is_empty() && !tags.contains(&h) {
                tags.push(h);
            }
        }
        Post {
            post_id: post_id.into(),
            created_at,
            hashtags: tags,
        }
    }

    pub fn hashtags(&self) -> &[String] {
        &self.hashtags
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewsItem {
    pub id: String,
    pub label: Option<Label>,
    pub published_at: Option<DateTime<Utc>>,
    pub posts: Vec<Post>,
}

impl NewsItem {
    /// Distinct hashtags across all posts, in first-appearance order.
    pub fn distinct_hashtags(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for post in &self.posts {
            for h in post.hashtags() {
                if seen.insert(h.as_str()) {
                    out.push(h.as_str());
                }
            }
        }
        out
    }

    pub fn is_hashtag_free(&self) -> bool {
        self.posts.iter().all(|p| p.hashtags().is_empty())
    }
}

/// Bijection between hashtag strings and dense indices `0..len`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut v = Vocabulary::new();
        for t in terms {
            if v.index.contains_key(&t) {
                return Err(Error::Format(format!("duplicate vocabulary entry {t:?}")));
            }
            v.insert(t);
        }
        Ok(v)
    }

    /// Returns the index of `term`, appending it if unseen.
    pub fn insert(&mut self, term: String) -> usize {
        if let Some(&i) = self.index.get(&term) {
            return i;
        }
        let i = self.terms.len();
        self.index.insert(term.clone(), i);
        self.terms.push(term);
        i
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A validated, immutable collection of news items.
///
/// The vocabulary is always the exact union of the hashtag sets of all posts,
/// indexed in order of first appearance when scanning news then posts.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    news: Vec<NewsItem>,
    vocabulary: Vocabulary,
    positions: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(news: Vec<NewsItem>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(news.len());
        let mut vocabulary = Vocabulary::new();
        for (i, item) in news.iter().enumerate() {
            if item.id.is_empty() {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    message: "empty news id".into(),
                });
            }
            if positions.insert(item.id.clone(), i).is_some() {
                return Err(Error::DuplicateNewsId {
                    line: i + 1,
                    id: item.id.clone(),
                });
            }
            for post in &item.posts {
                for h in post.hashtags() {
                    vocabulary.insert(h.clone());
                }
            }
        }
        Ok(Corpus {
            news,
            vocabulary,
            positions,
        })
    }

    pub fn news(&self) -> &[NewsItem] {
        &self.news
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn get(&self, id: &str) -> Option<&NewsItem> {
        self.positions.get(id).map(|&i| &self.news[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.news.len()
    }

    pub fn is_empty(&self) -> bool {
        self.news.is_empty()
    }

    pub fn labeled(&self) -> impl Iterator<Item = (&NewsItem, Label)> {
        self.news
            .iter()
            .filter_map(|n| n.label.map(|l| (n, l)))
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled().count()
    }

    pub fn post_count(&self) -> usize {
        self.news.iter().map(|n| n.posts.len()).sum()
    }

    /// Looks up a news item that must exist and carry a label.
    pub fn labeled_item(&self, id: &str) -> Result<(&NewsItem, Label)> {
        let item = self.get(id).ok_or_else(|| Error::UnknownNews(id.to_string()))?;
        let label = item.label.ok_or_else(|| Error::UnlabeledNews(id.to_string()))?;
        Ok((item, label))
    }

    pub fn into_news(self) -> Vec<NewsItem> {
        self.news
    }
}
