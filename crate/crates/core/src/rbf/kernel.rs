use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `exp(-r^2 / eps^2)`
    Gaussian,
    /// `(r^2 + eps^2)^(-1/2)`
    InvMultiquadric,
    /// `(1 - r/eps)_+^4 (1 + 4 r/eps)`
    WendlandC2,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Gaussian, KernelFamily::InvMultiquadric, KernelFamily::WendlandC2];

    pub fn tag(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "ga",
            KernelFamily::InvMultiquadric => "imq",
            KernelFamily::WendlandC2 => "wendland",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" | "gaussian" => Ok(KernelFamily::Gaussian),
            "imq" => Ok(KernelFamily::InvMultiquadric),
            "wendland" | "wendlandc2" => Ok(KernelFamily::WendlandC2),
            other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
        }
    }
}

/// A radial kernel with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl RbfKernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::ParameterOutOfRange {
                name: "epsilon",
                value: epsilon.to_string(),
                allowed: "finite and > 0",
            });
        }
        Ok(Self { family, epsilon })
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_sq(r * r)
    }

    /// Kernel value from a squared distance.
    pub fn eval_sq(&self, r2: f64) -> f64 {
        let e = self.epsilon;
        match self.family {
            KernelFamily::Gaussian => (-r2 / (e * e)).exp(),
            KernelFamily::InvMultiquadric => 1.0 / (r2 + e * e).sqrt(),
            KernelFamily::WendlandC2 => {
                let q = r2.sqrt() / e;
                if q >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - q;
                    let t2 = t * t;
                    t2 * t2 * (1.0 + 4.0 * q)
                }
            }
        }
    }
}

pub fn kernel_eval(kernel: &RbfKernel, r: f64) -> f64 {
    kernel.eval(r)
}
