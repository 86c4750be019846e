//! Seeded synthetic corpora with planted hashtag classes.
//!
//! Hashtags are split into a true pool and a fake pool. Each hashtag slot of
//! a post draws from the pool matching its news label with probability
//! `purity`, otherwise from the other pool; within a pool, popularity follows
//! a Zipf law. Optional chains attach extra "designated" news whose hashtags
//! reach the labeled pools only through a path of `chain_depth` hops.

use std::collections::HashSet;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Label, NewsItem, Post};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    /// Size of the two hashtag pools combined.
    pub hashtags: usize,
    pub news: usize,
    pub fake_ratio: f64,
    pub posts_min: usize,
    pub posts_max: usize,
    pub tags_min: usize,
    pub tags_max: usize,
    /// Probability that a hashtag slot is drawn from the news' own class pool.
    pub purity: f64,
    pub zipf_exponent: f64,
    /// Hops between a designated hashtag and the labeled pools; 0 disables chains.
    pub chain_depth: usize,
    /// Number of designated news items (classes alternate, starting with true).
    pub chain_news: usize,
    pub delay_min_hours: f64,
    pub delay_max_hours: f64,
    pub publish_window_days: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            hashtags: 800,
            news: 500,
            fake_ratio: 0.4,
            posts_min: 3,
            posts_max: 12,
            tags_min: 1,
            tags_max: 3,
            purity: 0.9,
            zipf_exponent: 1.0,
            chain_depth: 0,
            chain_news: 20,
            delay_min_hours: 0.5,
            delay_max_hours: 72.0,
            publish_window_days: 30.0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::param(format!("invalid value {value:?} for {key}")))
}

impl SyntheticParams {
    /// Sets one parameter from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "hashtags" => self.hashtags = parse_num(&key, value)?,
            "news" => self.news = parse_num(&key, value)?,
            "fake_ratio" => self.fake_ratio = parse_num(&key, value)?,
            "posts_min" => self.posts_min = parse_num(&key, value)?,
            "posts_max" => self.posts_max = parse_num(&key, value)?,
            "tags_min" => self.tags_min = parse_num(&key, value)?,
            "tags_max" => self.tags_max = parse_num(&key, value)?,
            "purity" => self.purity = parse_num(&key, value)?,
            "zipf_exponent" => self.zipf_exponent = parse_num(&key, value)?,
            "chain_depth" => self.chain_depth = parse_num(&key, value)?,
            "chain_news" => self.chain_news = parse_num(&key, value)?,
            "delay_min_hours" => self.delay_min_hours = parse_num(&key, value)?,
            "delay_max_hours" => self.delay_max_hours = parse_num(&key, value)?,
            "publish_window_days" => self.publish_window_days = parse_num(&key, value)?,
            _ => return Err(Error::param(format!("unknown synthetic parameter {key:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut p = SyntheticParams::default();
        p.apply_key_values(text)?;
        Ok(p)
    }

    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.hashtags < 2 {
            return Err(Error::param("empty hashtag pool: need at least 2 hashtags"));
        }
        if !(self.purity > 0.5 && self.purity <= 1.0) {
            return Err(Error::param(format!(
                "purity must be in (0.5,1], got {}",
                self.purity
            )));
        }
        if !(0.0..=1.0).contains(&self.fake_ratio) {
            return Err(Error::param("fake_ratio must be in [0,1]"));
        }
        if self.posts_min > self.posts_max || self.tags_min > self.tags_max {
            return Err(Error::param("min must not exceed max"));
        }
        if !(self.zipf_exponent >= 0.0) || !self.zipf_exponent.is_finite() {
            return Err(Error::param("zipf_exponent must be finite and >= 0"));
        }
        if !(self.delay_min_hours >= 0.0 && self.delay_min_hours <= self.delay_max_hours) {
            return Err(Error::param("need 0 <= delay_min_hours <= delay_max_hours"));
        }
        if !(self.publish_window_days >= 0.0) {
            return Err(Error::param("publish_window_days must be >= 0"));
        }
        if self.chain_depth > 0 && self.chain_news == 0 {
            return Err(Error::param("chain_depth > 0 requires chain_news > 0"));
        }
        Ok(())
    }
}

/// Generated corpus plus the ids of news that must stay out of training for
/// the chain construction to hold.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    /// News whose posts only carry chain-terminal hashtags.
    pub designated: Vec<String>,
    /// News carrying the chain links themselves.
    pub bridges: Vec<String>,
    /// Hashtags at the far end of each chain.
    pub designated_hashtags: Vec<String>,
}

impl SyntheticCorpus {
    pub fn held_out(&self) -> HashSet<String> {
        self.designated
            .iter()
            .chain(&self.bridges)
            .cloned()
            .collect()
    }
}

struct Pool {
    names: Vec<String>,
    sampler: WeightedIndex<f64>,
}

impl Pool {
    fn new(names: Vec<String>, exponent: f64) -> Result<Self> {
        let weights: Vec<f64> = (0..names.len())
            .map(|r| 1.0 / ((r + 1) as f64).powf(exponent))
            .collect();
        let sampler = WeightedIndex::new(&weights)
            .map_err(|e| Error::param(format!("invalid pool weights: {e}")))?;
        Ok(Pool { names, sampler })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> &str {
        &self.names[self.sampler.sample(rng)]
    }
}

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).unwrap()
}

struct Clock {
    window_secs: i64,
    delay_min_secs: i64,
    delay_max_secs: i64,
}

impl Clock {
    fn publish<R: Rng>(&self, rng: &mut R) -> DateTime<Utc> {
        base_time() + Duration::seconds(rng.random_range(0..=self.window_secs))
    }

    fn post_times<R: Rng>(&self, rng: &mut R, published: DateTime<Utc>, n: usize) -> Vec<DateTime<Utc>> {
        let mut times: Vec<_> = (0..n)
            .map(|_| published + Duration::seconds(rng.random_range(self.delay_min_secs..=self.delay_max_secs)))
            .collect();
        times.sort();
        times
    }
}

/// Generates a fully labeled synthetic corpus; identical for identical inputs.
pub fn generate_synthetic(params: &SyntheticParams, seed: u64) -> Result<SyntheticCorpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = params.hashtags.to_string().len();
    let names: Vec<String> = (0..params.hashtags).map(|i| format!("h{i:0width$}")).collect();
    let n_true = params.hashtags / 2;
    let true_pool = Pool::new(names[..n_true].to_vec(), params.zipf_exponent)?;
    let fake_pool = Pool::new(names[n_true..].to_vec(), params.zipf_exponent)?;
    let clock = Clock {
        window_secs: (params.publish_window_days * 86_400.0).round() as i64,
        delay_min_secs: (params.delay_min_hours * 3600.0).round() as i64,
        delay_max_secs: (params.delay_max_hours * 3600.0).round() as i64,
    };

    let n_fake = (params.news as f64 * params.fake_ratio).round() as usize;
    let mut labels: Vec<Label> = (0..params.news)
        .map(|i| if i < n_fake { Label::Fake } else { Label::True })
        .collect();
    labels.shuffle(&mut rng);

    let news_width = params.news.max(1).to_string().len();
    let mut news = Vec::with_capacity(params.news + 2 * params.chain_news);
    for (i, &label) in labels.iter().enumerate() {
        let (own, other) = match label {
            Label::True => (&true_pool, &fake_pool),
            Label::Fake => (&fake_pool, &true_pool),
        };
        let id = format!("n{i:0news_width$}");
        let published = clock.publish(&mut rng);
        let n_posts = rng.random_range(params.posts_min..=params.posts_max);
        let times = clock.post_times(&mut rng, published, n_posts);
        let mut posts = Vec::with_capacity(n_posts);
        for (j, t) in times.into_iter().enumerate() {
            let n_tags = rng.random_range(params.tags_min..=params.tags_max);
            let tags: Vec<String> = (0..n_tags)
                .map(|_| {
                    let pool = if rng.random::<f64>() < params.purity { own } else { other };
                    pool.draw(&mut rng).to_string()
                })
                .collect();
            posts.push(Post::new(format!("{id}-p{j:03}"), Some(t), tags));
        }
        news.push(NewsItem {
            id,
            label: Some(label),
            published_at: Some(published),
            posts,
        });
    }

    let mut designated = Vec::new();
    let mut bridges = Vec::new();
    let mut designated_hashtags = Vec::new();
    if params.chain_depth > 0 {
        for j in 0..params.chain_news {
            let label = if j % 2 == 0 { Label::True } else { Label::Fake };
            let anchor = match label {
                Label::True => true_pool.names[0].clone(),
                Label::Fake => fake_pool.names[0].clone(),
            };
            // anchor - b1 - ... - b(d-1) - terminal
            let mut path = vec![anchor];
            for k in 1..params.chain_depth {
                path.push(format!("chain{j:03}b{k}"));
            }
            let terminal = format!("chain{j:03}t");
            path.push(terminal.clone());

            let bridge_id = format!("chain{j:03}-bridge");
            let published = clock.publish(&mut rng);
            let times = clock.post_times(&mut rng, published, path.len() - 1);
            let posts = path
                .windows(2)
                .zip(times)
                .enumerate()
                .map(|(k, (pair, t))| Post::new(format!("{bridge_id}-p{k:03}"), Some(t), pair.to_vec()))
                .collect();
            news.push(NewsItem {
                id: bridge_id.clone(),
                label: Some(label),
                published_at: Some(published),
                posts,
            });

            let target_id = format!("chain{j:03}-target");
            let published = clock.publish(&mut rng);
            let n_posts = rng.random_range(params.posts_min.max(1)..=params.posts_max.max(1));
            let times = clock.post_times(&mut rng, published, n_posts);
            let posts = times
                .into_iter()
                .enumerate()
                .map(|(k, t)| Post::new(format!("{target_id}-p{k:03}"), Some(t), vec![terminal.clone()]))
                .collect();
            news.push(NewsItem {
                id: target_id.clone(),
                label: Some(label),
                published_at: Some(published),
                posts,
            });
            bridges.push(bridge_id);
            designated.push(target_id);
            designated_hashtags.push(terminal);
        }
    }

    Ok(SyntheticCorpus {
        corpus: Corpus::new(news)?,
        designated,
        bridges,
        designated_hashtags,
    })
}
