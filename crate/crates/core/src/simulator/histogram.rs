use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dense::{bits_to_index, index_to_bits};
use crate::error::{Error, Result};

/// Shot counts keyed by bitstring (classical bit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HistogramWire", into = "HistogramWire")]
pub struct CountsHistogram {
    n_bits: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct HistogramWire {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl From<CountsHistogram> for HistogramWire {
    fn from(h: CountsHistogram) -> Self {
        HistogramWire {
            shots: h.shots,
            counts: h.counts,
        }
    }
}

impl TryFrom<HistogramWire> for CountsHistogram {
    type Error = Error;

    fn try_from(w: HistogramWire) -> Result<Self> {
        let n_bits = w
            .counts
            .keys()
            .next()
            .map(String::len)
            .ok_or_else(|| Error::DegenerateInput("histogram without entries".into()))?;
        let h = CountsHistogram::from_map(n_bits, w.counts)?;
        if h.shots != w.shots {
            return Err(Error::arg(format!(
                "counts sum to {} but shots is {}",
                h.shots, w.shots
            )));
        }
        Ok(h)
    }
}

impl CountsHistogram {
    /// From a dense count vector indexed by basis index.
    pub fn from_dense(n_bits: usize, dense: &[u64]) -> Result<Self> {
        if dense.len() != 1 << n_bits {
            return Err(Error::arg("dense count vector has the wrong length"));
        }
        let counts: BTreeMap<String, u64> = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (index_to_bits(i, n_bits), c))
            .collect();
        Ok(CountsHistogram {
            n_bits,
            shots: dense.iter().sum(),
            counts,
        })
    }

    pub fn from_map(n_bits: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        for key in counts.keys() {
            if key.len() != n_bits || bits_to_index(key).is_none() {
                return Err(Error::arg(format!("bad bitstring {key:?} for {n_bits} bits")));
            }
        }
        let counts: BTreeMap<String, u64> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        Ok(CountsHistogram {
            n_bits,
            shots: counts.values().sum(),
            counts,
        })
    }

    pub fn from_pairs<'a>(n_bits: usize, pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            *map.entry(k.to_string()).or_insert(0) += v;
        }
        Self::from_map(n_bits, map)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.shots == 0
    }

    /// Counts as a dense vector indexed by basis index.
    pub fn to_dense(&self) -> Vec<u64> {
        let mut v = vec![0; 1 << self.n_bits];
        for (k, &c) in &self.counts {
            v[bits_to_index(k).expect("validated")] = c;
        }
        v
    }

    /// Relative frequencies as a dense vector.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.shots.max(1) as f64;
        self.to_dense().into_iter().map(|c| c as f64 / total).collect()
    }

    /// Keeps only entries whose basis index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> CountsHistogram {
        let counts: BTreeMap<String, u64> = self
            .counts
            .iter()
            .filter(|(k, _)| keep(bits_to_index(k).expect("validated")))
            .map(|(k, &v)| (k.clone(), v))
            .collect();
        CountsHistogram {
            n_bits: self.n_bits,
            shots: counts.values().sum(),
            counts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("histogram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
