//! Seeded Quest-style synthetic transaction generator.
//!
//! A pool of "potentially frequent" sequences is drawn first; each customer
//! history is then spliced together from weighted picks out of that pool,
//! with every spliced item independently replaced by uniform noise at
//! `corruption_prob`. One transaction per day from a fixed epoch.

use chrono::{Days, NaiveDate};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{TransactionDb, TransactionRecord};
use crate::model::{Item, ObjectId};

/// First timestamp of every generated customer history.
pub const EPOCH: NaiveDate = match NaiveDate::from_ymd_opt(2008, 1, 1) {
    Some(d) => d,
    None => panic!("valid epoch"),
};

/// Mean length of a pool pattern.
const POOL_PATTERN_MEAN_LEN: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// `|D|`: number of customers.
    pub customers: usize,
    /// `|C|`: average transactions per customer.
    pub avg_transactions: f64,
    /// `|I|`: items per transaction. Only 1 is supported.
    pub event_size: usize,
    /// `|N|`: number of distinct items; ids are `0..items`.
    pub items: u32,
    pub pattern_pool_size: usize,
    pub corruption_prob: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Parameters named like `C15-I1-N15-D400`, with the default pool.
    pub fn new(customers: usize, avg_transactions: f64, items: u32, seed: u64) -> Self {
        Self {
            customers,
            avg_transactions,
            event_size: 1,
            items,
            pattern_pool_size: items as usize,
            corruption_prob: 0.25,
            seed,
        }
    }

    /// `C15-I1-N15-D400` style label.
    pub fn label(&self) -> String {
        format!(
            "C{}-I{}-N{}-D{}",
            self.avg_transactions, self.event_size, self.items, self.customers
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.avg_transactions.is_finite() && self.avg_transactions > 0.0) {
            return bad(format!("C must be positive, got {}", self.avg_transactions));
        }
        if self.items == 0 {
            return bad("N must be at least 1".into());
        }
        if self.event_size != 1 {
            return bad(format!(
                "only single-item events are supported, got I = {}",
                self.event_size
            ));
        }
        if self.pattern_pool_size == 0 {
            return bad("pattern pool must not be empty".into());
        }
        if !(0.0..=1.0).contains(&self.corruption_prob) {
            return bad(format!(
                "corruption probability {} outside [0, 1]",
                self.corruption_prob
            ));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one customer, stable regardless of how customers
/// are scheduled.
fn customer_rng(seed: u64, customer: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed) ^ customer as u64))
}

pub fn generate(params: &SynthParams) -> Result<TransactionDb> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let length = Geometric::new(1.0 / POOL_PATTERN_MEAN_LEN).expect("valid p");
    let pool: Vec<Vec<Item>> = (0..params.pattern_pool_size)
        .map(|_| {
            let len = 1 + length.sample(&mut rng) as usize;
            (0..len).map(|_| Item(rng.gen_range(0..params.items))).collect()
        })
        .collect();
    let weights: Vec<f64> = (0..pool.len()).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let pick = WeightedIndex::new(&weights).expect("positive weights");
    let transactions = Poisson::new(params.avg_transactions).expect("positive mean");

    let mut records = Vec::new();
    for customer in 0..params.customers {
        let mut rng = customer_rng(params.seed, customer);
        let count = (transactions.sample(&mut rng) as usize).max(1);
        let id = ObjectId::new(customer.to_string());
        let mut day = 0u64;
        'fill: loop {
            for &item in &pool[pick.sample(&mut rng)] {
                if day as usize == count {
                    break 'fill;
                }
                let item = if rng.gen_bool(params.corruption_prob) {
                    Item(rng.gen_range(0..params.items))
                } else {
                    item
                };
                let date = EPOCH.checked_add_days(Days::new(day)).expect("date in range");
                records.push(TransactionRecord {
                    object_id: id.clone(),
                    timestamp: date.and_hms_opt(0, 0, 0).expect("midnight"),
                    item,
                });
                day += 1;
            }
        }
    }
    Ok(TransactionDb::from_records(records))
}
