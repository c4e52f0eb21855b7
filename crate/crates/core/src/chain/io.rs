//! Chain-spec JSON: `{"states": ["A", ...], "rates": [[i, j, rate], ...]}`.

use serde::{Deserialize, Serialize};

use super::ChainSpec;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    states: Vec<String>,
    rates: Vec<(usize, usize, f64)>,
}

impl ChainSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ChainFile = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "chain spec line {} column {}: {}",
                e.line(),
                e.column(),
                e
            ))
        })?;
        let m = file.states.len();
        if m < 2 {
            return Err(Error::Parse(format!(
                "field `states`: need at least 2 states, got {m}"
            )));
        }
        for (k, &(i, j, r)) in file.rates.iter().enumerate() {
            let field = format!("field `rates[{k}]`");
            if i >= m || j >= m {
                return Err(Error::Parse(format!(
                    "{field}: state index out of range 0..{m} in [{i}, {j}, {r}]"
                )));
            }
            if i == j {
                return Err(Error::Parse(format!("{field}: self-loop [{i}, {j}, {r}]")));
            }
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Parse(format!(
                    "{field}: rate must be strictly positive, got {r}"
                )));
            }
        }
        ChainSpec::from_rates(Some(file.states), m, &file.rates)
            .map_err(|e| Error::Parse(format!("chain spec: {e}")))
    }

    pub fn to_json_string(&self) -> String {
        let file = ChainFile {
            states: self.labels().to_vec(),
            rates: self.edges().collect(),
        };
        serde_json::to_string_pretty(&file).expect("chain spec serializes")
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}
