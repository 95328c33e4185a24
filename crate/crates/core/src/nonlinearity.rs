use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    /// `Box phi = +|phi|^{k-1} phi`.
    Defocusing,
    /// `Box phi = -|phi|^{k-1} phi`.
    Focusing,
}

/// Right-hand side `N(phi)` of `Box phi = N(phi)`, with `Box = -d_tt + Laplacian`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Nonlinearity {
    /// Free wave, `N = 0`.
    Linear,
    /// `N = +-phi^k` for odd `k >= 3`.
    Power { k: u32, sign: Sign },
    /// `N = -phi exp(phi^2)`.
    ExpFocusing,
}

impl Nonlinearity {
    pub fn power(k: u32, sign: Sign) -> Result<Self> {
        if k < 3 || k % 2 == 0 {
            return Err(Error::InvalidNonlinearity(format!(
                "power nonlinearity needs odd k >= 3, got {k}"
            )));
        }
        Ok(Nonlinearity::Power { k, sign })
    }

    pub fn defocusing(k: u32) -> Result<Self> {
        Self::power(k, Sign::Defocusing)
    }

    pub fn focusing(k: u32) -> Result<Self> {
        Self::power(k, Sign::Focusing)
    }

    /// `N(phi)`. For odd `k`, `|phi|^{k-1} phi = phi^k`.
    #[inline]
    pub fn eval<T: Real>(&self, phi: T) -> T {
        match *self {
            Nonlinearity::Linear => T::zero(),
            Nonlinearity::Power { k, sign } => {
                let v = phi.powi(k as i32);
                match sign {
                    Sign::Defocusing => v,
                    Sign::Focusing => -v,
                }
            }
            Nonlinearity::ExpFocusing => -phi * (phi * phi).exp(),
        }
    }

    /// Potential `V` with `V'(phi) = N(phi)` and `V(0) = 0`, so that the
    /// conserved energy density is `½|d phi|^2 + V(phi)`.
    pub fn potential<T: Real>(&self, phi: T) -> T {
        match *self {
            Nonlinearity::Linear => T::zero(),
            Nonlinearity::Power { k, sign } => {
                let v = phi.abs().powi(k as i32 + 1) / T::lit(f64::from(k + 1));
                match sign {
                    Sign::Defocusing => v,
                    Sign::Focusing => -v,
                }
            }
            Nonlinearity::ExpFocusing => -T::lit(0.5) * ((phi * phi).exp() - T::one()),
        }
    }

    pub fn is_focusing(&self) -> bool {
        matches!(
            self,
            Nonlinearity::Power { sign: Sign::Focusing, .. } | Nonlinearity::ExpFocusing
        )
    }

    /// Exponent `k` for power nonlinearities.
    pub fn exponent(&self) -> Option<u32> {
        match self {
            Nonlinearity::Power { k, .. } => Some(*k),
            _ => None,
        }
    }

    /// Parses `linear`, `exp-focusing`, `defocusing:<k>` or `focusing:<k>`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "linear" => return Ok(Nonlinearity::Linear),
            "exp-focusing" | "exp_focusing" => return Ok(Nonlinearity::ExpFocusing),
            _ => {}
        }
        let (kind, k) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidNonlinearity(format!("cannot parse `{s}`")))?;
        let k: u32 = k
            .parse()
            .map_err(|_| Error::InvalidNonlinearity(format!("bad exponent in `{s}`")))?;
        match kind {
            "defocusing" => Self::defocusing(k),
            "focusing" => Self::focusing(k),
            _ => Err(Error::InvalidNonlinearity(format!("cannot parse `{s}`"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Nonlinearity::Linear => "linear".into(),
            Nonlinearity::Power { k, sign: Sign::Defocusing } => format!("defocusing:{k}"),
            Nonlinearity::Power { k, sign: Sign::Focusing } => format!("focusing:{k}"),
            Nonlinearity::ExpFocusing => "exp-focusing".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_even_or_small_exponents() {
        assert!(Nonlinearity::defocusing(2).is_err());
        assert!(Nonlinearity::focusing(4).is_err());
        assert!(Nonlinearity::focusing(1).is_err());
        assert!(Nonlinearity::focusing(7).is_ok());
    }

    #[test]
    fn focusing_cubic_at_two() {
        let n = Nonlinearity::focusing(3).unwrap();
        assert_eq!(n.eval(2.0f64), -8.0);
        assert_eq!(Nonlinearity::defocusing(3).unwrap().eval(-2.0f64), -8.0);
    }

    #[test]
    fn labels_round_trip() {
        for s in ["linear", "exp-focusing", "defocusing:3", "focusing:7"] {
            assert_eq!(Nonlinearity::parse(s).unwrap().label(), s);
        }
        assert!(Nonlinearity::parse("focusing:x").is_err());
        assert!(Nonlinearity::parse("cubic").is_err());
    }

    proptest! {
        #[test]
        fn vanishes_at_origin_and_potential_is_antiderivative(phi in -1.5f64..1.5) {
            for n in [Nonlinearity::Linear, Nonlinearity::defocusing(3).unwrap(), Nonlinearity::focusing(7).unwrap(), Nonlinearity::ExpFocusing] {
                prop_assert_eq!(n.eval(0.0f64), 0.0);
                prop_assert_eq!(n.potential(0.0f64), 0.0);
                let h = 1e-5;
                let fd = (n.potential(phi + h) - n.potential(phi - h)) / (2.0 * h);
                prop_assert!((fd - n.eval(phi)).abs() < 1e-6 * (1.0 + n.eval(phi).abs()));
            }
        }
    }
}
