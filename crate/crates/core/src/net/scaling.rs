use serde::{Deserialize, Serialize};

use crate::ad::Jet2;

use super::NetError;

/// Affine map of one physical input onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScale {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl InputScale {
    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Divisor taking one physical output to order one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputScale {
    pub name: String,
    pub divisor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRules {
    pub inputs: Vec<InputScale>,
    pub outputs: Vec<OutputScale>,
}

impl ScalingRules {
    pub fn validate(&self) -> Result<(), NetError> {
        for i in &self.inputs {
            if !(i.span() > 0.0) || !i.span().is_finite() {
                return Err(NetError::InvalidScaling(format!("input `{}` has non-positive span", i.name)));
            }
        }
        for o in &self.outputs {
            if !(o.divisor > 0.0) || !o.divisor.is_finite() {
                return Err(NetError::InvalidScaling(format!("output `{}` has non-positive divisor", o.name)));
            }
        }
        Ok(())
    }

    pub fn scale_input(&self, i: usize, x: f64) -> f64 {
        let s = &self.inputs[i];
        (x - s.lo) / s.span()
    }

    pub fn unscale_input(&self, i: usize, xs: f64) -> f64 {
        let s = &self.inputs[i];
        s.lo + xs * s.span()
    }

    pub fn scale_output(&self, o: usize, v: f64) -> f64 {
        v / self.outputs[o].divisor
    }

    pub fn unscale_output(&self, o: usize, vs: f64) -> f64 {
        vs * self.outputs[o].divisor
    }

    /// Physical-unit jet of output `o`; derivative `i` of the scaled jet is
    /// taken along input `tracked[i]` and rescaled by that input's span.
    pub fn unscale_jet(&self, o: usize, jet: &Jet2<f64>, tracked: &[usize]) -> Jet2<f64> {
        let k = jet.k();
        let d = self.outputs[o].divisor;
        let spans: Vec<f64> = tracked.iter().map(|&i| self.inputs[i].span()).collect();
        let grad: Vec<f64> = (0..k).map(|i| jet.d1(i) * d / spans[i]).collect();
        let mut hess = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                hess[a * k + b] = jet.d2(a, b) * d / (spans[a] * spans[b]);
            }
        }
        Jet2::from_parts(jet.value() * d, &grad, &hess).expect("k within range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> ScalingRules {
        ScalingRules {
            inputs: vec![
                InputScale { name: "y".into(), lo: 0.0, hi: 8e-4 },
                InputScale { name: "t".into(), lo: 0.0, hi: 0.25 },
            ],
            outputs: vec![
                OutputScale { name: "u".into(), divisor: 2e-5 },
                OutputScale { name: "gamma_p".into(), divisor: 100e6 / 100e9 },
            ],
        }
    }

    #[test]
    fn unscale_examples() {
        let r = rules();
        r.validate().unwrap();
        assert_eq!(r.unscale_output(0, 1.0), 2e-5);
        assert!((r.unscale_output(1, 1.0) - 1e-3).abs() < 1e-18);
        let x = 3.3e-4;
        let rt = r.unscale_input(0, r.scale_input(0, x));
        assert!((rt - x).abs() <= 1e-15 * x);
        let v = 7.1e-6;
        assert!((r.unscale_output(0, r.scale_output(0, v)) - v).abs() <= 1e-15 * v);
    }

    #[test]
    fn derivative_rescaling_follows_chain_rule() {
        let r = rules();
        let j = Jet2::from_parts(1.0, &[2.0, 3.0], &[4.0, 5.0, 5.0, 6.0]).unwrap();
        let p = r.unscale_jet(0, &j, &[0, 1]);
        assert!((p.d1(0) - 2.0 * 2e-5 / 8e-4).abs() < 1e-15);
        assert!((p.d2(0, 1) - 5.0 * 2e-5 / (8e-4 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn non_positive_divisors_rejected() {
        let mut r = rules();
        r.outputs[0].divisor = 0.0;
        assert!(r.validate().is_err());
        let mut r = rules();
        r.inputs[1].hi = 0.0;
        assert!(r.validate().is_err());
    }
}
