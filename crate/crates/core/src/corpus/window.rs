use serde::Serialize;

use super::{Corpus, NewsItem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    /// News kept whole because they have no publish time.
    pub exempt_news: usize,
    /// Posts dropped because they have no creation time.
    pub untimed_posts_dropped: usize,
    pub posts_dropped: usize,
    pub posts_retained: usize,
}

/// Keeps, for every news item, only the posts created within `horizon_hours`
/// of its publish time (closed interval). News without a publish time keep all
/// of their posts. The vocabulary is rebuilt from the retained posts.
pub fn filter_by_time(corpus: &Corpus, horizon_hours: f64) -> Result<(Corpus, FilterReport)> {
    if !(horizon_hours > 0.0) || !horizon_hours.is_finite() {
        return Err(Error::param(format!(
            "time horizon must be a positive number of hours, got {horizon_hours}"
        )));
    }
    let horizon_ms = horizon_hours * 3_600_000.0;
    let mut report = FilterReport::default();
    let mut news = Vec::with_capacity(corpus.len());
    for item in corpus.news() {
        let Some(published) = item.published_at else {
            report.exempt_news += 1;
            report.posts_retained += item.posts.len();
            news.push(item.clone());
            continue;
        };
        let mut posts = Vec::new();
        for post in &item.posts {
            match post.created_at {
                None => {
                    report.untimed_posts_dropped += 1;
                    report.posts_dropped += 1;
                }
                Some(created) => {
                    let elapsed = (created - published).num_milliseconds() as f64;
                    if elapsed <= horizon_ms {
                        posts.push(post.clone());
                    } else {
                        report.posts_dropped += 1;
                    }
                }
            }
        }
        report.posts_retained += posts.len();
        news.push(NewsItem {
            id: item.id.clone(),
            label: item.label,
            published_at: item.published_at,
            posts,
        });
    }
    Ok((Corpus::new(news)?, report))
}
