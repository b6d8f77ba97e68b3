use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Node non-linearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Tanh,
    Sig,
    Relu,
    Elu,
}

impl Kernel {
    pub const ALL: [Kernel; 4] = [Kernel::Tanh, Kernel::Sig, Kernel::Relu, Kernel::Elu];

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Kernel::Tanh => x.tanh(),
            Kernel::Sig => sigmoid(x),
            Kernel::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Kernel::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp_m1()
                }
            }
        }
    }

    /// Derivative with respect to the pre-activation `x`.
    #[inline]
    pub fn grad(self, x: f64) -> f64 {
        match self {
            Kernel::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Kernel::Sig => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            // the subgradient at 0 is taken as 0
            Kernel::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
        }
    }

    /// Derivative given both the pre-activation and the already computed
    /// activation value. Avoids a second transcendental call for tanh/sig.
    #[inline]
    pub(crate) fn grad_from(self, x: f64, y: f64) -> f64 {
        match self {
            Kernel::Tanh => 1.0 - y * y,
            Kernel::Sig => y * (1.0 - y),
            Kernel::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    y + 1.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Tanh => "tanh",
            Kernel::Sig => "sig",
            Kernel::Relu => "relu",
            Kernel::Elu => "elu",
        }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Kernel::Tanh),
            "sig" | "sigmoid" => Ok(Kernel::Sig),
            "relu" => Ok(Kernel::Relu),
            "elu" => Ok(Kernel::Elu),
            other => Err(format!("unknown kernel '{other}'")),
        }
    }
}
