use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact rational serialized as `{"num": .., "den": ..}` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: i64,
    pub den: i64,
}

impl From<Ratio<i64>> for RationalJson {
    fn from(r: Ratio<i64>) -> Self {
        RationalJson {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl From<RationalJson> for Ratio<i64> {
    fn from(r: RationalJson) -> Self {
        Ratio::new(r.num, r.den)
    }
}

impl std::fmt::Display for RationalJson {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
