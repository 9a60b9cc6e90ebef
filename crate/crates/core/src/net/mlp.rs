//! Network evaluation on jets.
//!
//! Two evaluation paths share the same semantics:
//!
//! * [`forward_generic`] walks the layers neuron by neuron on [`Jet2`] values
//!   of any [`Scalar`]. With tape variables for θ it is a complete (if slow)
//!   reverse-mode route on its own.
//! * [`forward_batch`] / [`backward_batch`] stack the jet components of many
//!   points side by side so each affine layer is one matrix product, and
//!   record a [`BatchTrace`] from which parameter gradients are pulled back
//!   given adjoints on the output jet components.
//!
//! Column `p * C + c` of every activation matrix holds jet component `c`
//! (value, first derivatives, packed upper-triangle second derivatives) of
//! point `p`.

use crate::ad::{component_count, Jet2, Scalar};

use super::{Activation, NetError, NetworkSpec};

/// Evaluates the network on input jets, generic over the scalar type.
pub fn forward_generic<S: Scalar>(spec: &NetworkSpec, theta: &[S], inputs: &[Jet2<S>]) -> Result<Vec<Jet2<S>>, NetError> {
    if inputs.len() != spec.n_inputs() {
        return Err(NetError::InputCount {
            got: inputs.len(),
            expected: spec.n_inputs(),
        });
    }
    let layout = spec.layout();
    if theta.len() != layout.total() {
        return Err(NetError::ParamCount {
            got: theta.len(),
            expected: layout.total(),
        });
    }
    let k = inputs[0].k();
    let mut act: Vec<Jet2<S>> = inputs.to_vec();
    for l in 0..layout.n_layers() {
        let (n_in, n_out) = layout.shape(l);
        let w = &theta[layout.weights_range(l)];
        let b = &theta[layout.bias_range(l)];
        let hidden = l + 1 < layout.n_layers();
        let mut next = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let mut z = Jet2::constant(b[i], k);
            for j in 0..n_in {
                z = z + act[j] * Jet2::constant(w[i * n_in + j], k);
            }
            let a = if hidden && spec.activation == Activation::Tanh { z.tanh() } else { z };
            if !a.is_finite() {
                return Err(NetError::NonFinite { layer: l });
            }
            next.push(a);
        }
        act = next;
    }
    Ok(act)
}

/// Single-point evaluation on `f64` jets.
pub fn forward_jet(spec: &NetworkSpec, theta: &[f64], inputs: &[Jet2<f64>]) -> Result<Vec<Jet2<f64>>, NetError> {
    forward_generic(spec, theta, inputs)
}

/// Input jets for many points stacked column-wise (see module docs).
#[derive(Debug, Clone)]
pub struct BatchInput {
    k: usize,
    n_points: usize,
    n_inputs: usize,
    data: Vec<f64>,
}

impl BatchInput {
    /// Points whose first `k` coordinates are tracked variables; any further
    /// coordinates enter as constants.
    pub fn seeded(points: &[&[f64]], n_inputs: usize, k: usize) -> Result<Self, NetError> {
        if k == 0 || k > n_inputs {
            return Err(NetError::InvalidSpec(format!("cannot track {k} of {n_inputs} inputs")));
        }
        let c = component_count(k);
        let cols = points.len() * c;
        let mut data = vec![0.0; n_inputs * cols];
        for (p, x) in points.iter().enumerate() {
            if x.len() != n_inputs {
                return Err(NetError::InputCount {
                    got: x.len(),
                    expected: n_inputs,
                });
            }
            for (i, &xi) in x.iter().enumerate() {
                data[i * cols + p * c] = xi;
                if i < k {
                    data[i * cols + p * c + 1 + i] = 1.0;
                }
            }
        }
        Ok(BatchInput {
            k,
            n_points: points.len(),
            n_inputs,
            data,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

struct LayerTrace {
    input: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
}

/// Everything the reverse pass needs from one batched forward evaluation.
pub struct BatchTrace {
    k: usize,
    n_points: usize,
    n_outputs: usize,
    layers: Vec<LayerTrace>,
    output: Vec<f64>,
}

impl BatchTrace {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_components(&self) -> usize {
        component_count(self.k)
    }

    /// Raw output `o` at point `p` as a jet.
    pub fn output_jet(&self, p: usize, o: usize) -> Jet2<f64> {
        let c = self.n_components();
        let cols = self.n_points * c;
        let start = o * cols + p * c;
        Jet2::from_components(self.k, &self.output[start..start + c]).expect("consistent component count")
    }

    /// Packed components of output `o` at point `p`.
    pub fn output_components(&self, p: usize, o: usize) -> &[f64] {
        let c = self.n_components();
        let cols = self.n_points * c;
        let start = o * cols + p * c;
        &self.output[start..start + c]
    }

    /// Zeroed buffer shaped like the output matrix, for output adjoints.
    pub fn adjoint_buffer(&self) -> Vec<f64> {
        vec![0.0; self.output.len()]
    }

    /// Mutable view of the adjoint slots of output `o` at point `p` inside `buf`.
    pub fn adjoint_slot<'b>(&self, buf: &'b mut [f64], p: usize, o: usize) -> &'b mut [f64] {
        let c = self.n_components();
        let cols = self.n_points * c;
        let start = o * cols + p * c;
        &mut buf[start..start + c]
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }
}

/// Upper-triangle pair list `(a, b, column)` for `k` tracked variables.
fn pairs(k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    let mut c = 1 + k;
    for a in 0..k {
        for b in a..k {
            out.push((a, b, c));
            c += 1;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    rsa: isize,
    csa: isize,
    b: &[f64],
    rsb: isize,
    csb: isize,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: the stride/extent pairs passed by the callers address only
    // elements inside `a`, `b` (both read) and `c` (row-major m×n, written).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn tanh_forward(z: &[f64], out: &mut [f64], s_out: &mut f64, k: usize, pairs: &[(usize, usize, usize)]) {
    let s = z[0].tanh();
    let s1 = 1.0 - s * s;
    let s2 = -2.0 * s * s1;
    *s_out = s;
    out[0] = s;
    for i in 0..k {
        out[1 + i] = s1 * z[1 + i];
    }
    for &(a, b, c) in pairs {
        out[c] = s1 * z[c] + s2 * z[1 + a] * z[1 + b];
    }
}

fn tanh_backward(z: &[f64], s: f64, ob: &[f64], zb: &mut [f64], k: usize, pairs: &[(usize, usize, usize)]) {
    let s1 = 1.0 - s * s;
    let s2 = -2.0 * s * s1;
    let mut sb1 = 0.0;
    let mut sb2 = 0.0;
    for i in 0..k {
        zb[1 + i] = s1 * ob[1 + i];
        sb1 += ob[1 + i] * z[1 + i];
    }
    for &(a, b, c) in pairs {
        zb[c] = s1 * ob[c];
        sb1 += ob[c] * z[c];
        sb2 += ob[c] * z[1 + a] * z[1 + b];
        zb[1 + a] += s2 * ob[c] * z[1 + b];
        zb[1 + b] += s2 * ob[c] * z[1 + a];
    }
    let sb = ob[0] + sb1 * (-2.0 * s) + sb2 * (-2.0 + 6.0 * s * s);
    zb[0] = sb * s1;
}

/// Batched forward evaluation recording a trace for [`backward_batch`].
pub fn forward_batch(spec: &NetworkSpec, theta: &[f64], input: &BatchInput) -> Result<BatchTrace, NetError> {
    let layout = spec.layout();
    if theta.len() != layout.total() {
        return Err(NetError::ParamCount {
            got: theta.len(),
            expected: layout.total(),
        });
    }
    if input.n_inputs != spec.n_inputs() {
        return Err(NetError::InputCount {
            got: input.n_inputs,
            expected: spec.n_inputs(),
        });
    }
    let k = input.k;
    let c = component_count(k);
    let np = input.n_points;
    let cols = np * c;
    let pr = pairs(k);
    let mut layers = Vec::with_capacity(layout.n_layers());
    let mut act = input.data.clone();
    for l in 0..layout.n_layers() {
        let (n_in, n_out) = layout.shape(l);
        let w = &theta[layout.weights_range(l)];
        let b = &theta[layout.bias_range(l)];
        let mut z = vec![0.0; n_out * cols];
        gemm(n_out, n_in, cols, w, n_in as isize, 1, &act, cols as isize, 1, 0.0, &mut z);
        for i in 0..n_out {
            let row = &mut z[i * cols..(i + 1) * cols];
            for p in 0..np {
                row[p * c] += b[i];
            }
        }
        let hidden = l + 1 < layout.n_layers();
        if hidden {
            let mut out = vec![0.0; n_out * cols];
            let mut s = vec![0.0; n_out * np];
            match spec.activation {
                Activation::Tanh => {
                    for i in 0..n_out {
                        for p in 0..np {
                            let off = i * cols + p * c;
                            tanh_forward(&z[off..off + c], &mut out[off..off + c], &mut s[i * np + p], k, &pr);
                        }
                    }
                }
                Activation::Identity => out.copy_from_slice(&z),
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(NetError::NonFinite { layer: l });
            }
            layers.push(LayerTrace { input: act, z, s });
            act = out;
        } else {
            if z.iter().any(|v| !v.is_finite()) {
                return Err(NetError::NonFinite { layer: l });
            }
            layers.push(LayerTrace {
                input: act,
                z: Vec::new(),
                s: Vec::new(),
            });
            act = z;
        }
    }
    Ok(BatchTrace {
        k,
        n_points: np,
        n_outputs: spec.n_outputs(),
        layers,
        output: act,
    })
}

/// Accumulates into `grad` the pull-back of `out_adjoint` (shaped like the
/// output matrix) through the recorded trace.
pub fn backward_batch(
    spec: &NetworkSpec,
    theta: &[f64],
    trace: &BatchTrace,
    out_adjoint: &[f64],
    grad: &mut [f64],
) -> Result<(), NetError> {
    let layout = spec.layout();
    if grad.len() != layout.total() || theta.len() != layout.total() {
        return Err(NetError::ParamCount {
            got: grad.len(),
            expected: layout.total(),
        });
    }
    let k = trace.k;
    let c = component_count(k);
    let np = trace.n_points;
    let cols = np * c;
    let pr = pairs(k);
    let mut zbar = out_adjoint.to_vec();
    for l in (0..layout.n_layers()).rev() {
        let (n_in, n_out) = layout.shape(l);
        let lt = &trace.layers[l];
        // dW += Zbar · Aᵀ
        let wr = layout.weights_range(l);
        gemm(
            n_out,
            cols,
            n_in,
            &zbar,
            cols as isize,
            1,
            &lt.input,
            1,
            cols as isize,
            1.0,
            &mut grad[wr.clone()],
        );
        let br = layout.bias_range(l);
        for i in 0..n_out {
            let row = &zbar[i * cols..(i + 1) * cols];
            let mut acc = 0.0;
            for p in 0..np {
                acc += row[p * c];
            }
            grad[br.start + i] += acc;
        }
        if l == 0 {
            break;
        }
        // Abar = Wᵀ · Zbar
        let w = &theta[wr];
        let mut abar = vec![0.0; n_in * cols];
        gemm(n_in, n_out, cols, w, 1, n_in as isize, &zbar, cols as isize, 1, 0.0, &mut abar);
        let prev = &trace.layers[l - 1];
        let mut zb = vec![0.0; n_in * cols];
        match spec.activation {
            Activation::Tanh => {
                for i in 0..n_in {
                    for p in 0..np {
                        let off = i * cols + p * c;
                        tanh_backward(
                            &prev.z[off..off + c],
                            prev.s[i * np + p],
                            &abar[off..off + c],
                            &mut zb[off..off + c],
                            k,
                            &pr,
                        );
                    }
                }
            }
            Activation::Identity => zb.copy_from_slice(&abar),
        }
        zbar = zb;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::{Tape, Var};
    use crate::net::init_params;

    fn seeded(x: &[f64], k: usize) -> Vec<Jet2<f64>> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet2::lift(v, (i < k).then_some(i), k).unwrap())
            .collect()
    }

    #[test]
    fn zero_weights_give_zero_outputs() {
        let spec = NetworkSpec::new(["y", "t"], &[8, 8], ["u", "g"]).unwrap();
        let theta = vec![0.0; spec.param_count()];
        let out = forward_jet(&spec, &theta, &seeded(&[0.3, 0.7], 2)).unwrap();
        for o in out {
            assert!(o.components().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn identity_network_is_affine() {
        let spec = NetworkSpec::new(["x0", "x1"], &[3], ["o"]).unwrap().with_activation(Activation::Identity);
        let theta = init_params(&spec, 5).values;
        let layout = spec.layout();
        let w0 = &theta[layout.weights_range(0)];
        let w1 = &theta[layout.weights_range(1)];
        let x = [0.25, -0.5];
        let out = forward_jet(&spec, &theta, &seeded(&x, 2)).unwrap();
        let mut expected = 0.0;
        let mut grad = [0.0; 2];
        for h in 0..3 {
            let zh: f64 = w0[h * 2] * x[0] + w0[h * 2 + 1] * x[1];
            expected += w1[h] * zh;
            grad[0] += w1[h] * w0[h * 2];
            grad[1] += w1[h] * w0[h * 2 + 1];
        }
        assert!((out[0].value() - expected).abs() < 1e-15);
        assert!((out[0].d1(0) - grad[0]).abs() < 1e-15);
        assert!((out[0].d1(1) - grad[1]).abs() < 1e-15);
        assert_eq!(out[0].d2(0, 1), 0.0);
    }

    #[test]
    fn batch_path_matches_generic_path() {
        let spec = NetworkSpec::new(["x1", "x2", "t"], &[7, 5], ["a", "b", "c"]).unwrap();
        let theta = init_params(&spec, 11).values;
        let pts: Vec<Vec<f64>> = vec![vec![0.1, 0.9, 0.4], vec![0.6, 0.2, 0.8], vec![0.0, 1.0, 0.5]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let input = BatchInput::seeded(&refs, 3, 3).unwrap();
        let trace = forward_batch(&spec, &theta, &input).unwrap();
        for (p, x) in pts.iter().enumerate() {
            let out = forward_jet(&spec, &theta, &seeded(x, 3)).unwrap();
            for (o, jet) in out.iter().enumerate() {
                let a = jet.components();
                let b = trace.output_components(p, o);
                for (u, v) in a.iter().zip(b) {
                    assert!((u - v).abs() < 1e-13, "{u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn batch_backward_matches_scalar_tape() {
        let spec = NetworkSpec::new(["y", "t", "p"], &[6, 5], ["u", "g"]).unwrap();
        let theta = init_params(&spec, 3).values;
        let pts: Vec<Vec<f64>> = vec![vec![0.2, 0.3, 0.5], vec![0.7, 0.9, 0.1]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let input = BatchInput::seeded(&refs, 3, 2).unwrap();
        let trace = forward_batch(&spec, &theta, &input).unwrap();
        // loss = Σ_p Σ_o Σ_c w_{o,c} * comp², weights arbitrary but fixed
        let wts = |o: usize, c: usize| 0.3 + 0.1 * o as f64 + 0.05 * c as f64;
        let mut adj = trace.adjoint_buffer();
        for p in 0..2 {
            for o in 0..2 {
                let comps = trace.output_components(p, o).to_vec();
                let slot = trace.adjoint_slot(&mut adj, p, o);
                for (c, v) in comps.iter().enumerate() {
                    slot[c] = 2.0 * wts(o, c) * v;
                }
            }
        }
        let mut g_batch = vec![0.0; theta.len()];
        backward_batch(&spec, &theta, &trace, &adj, &mut g_batch).unwrap();

        let tape = Tape::new();
        let th: Vec<Var> = theta.iter().map(|&v| tape.leaf(v)).collect();
        let mut loss = Var::constant(0.0);
        for x in &pts {
            let inputs: Vec<Jet2<Var>> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| Jet2::lift(Var::constant(v), (i < 2).then_some(i), 2).unwrap())
                .collect();
            let out = forward_generic(&spec, &th, &inputs).unwrap();
            for (o, jet) in out.iter().enumerate() {
                for (c, v) in jet.components().into_iter().enumerate() {
                    loss = loss + (v * v).mul_f(wts(o, c));
                }
            }
        }
        let g_tape = tape.gradient(loss, &th).unwrap();
        for (a, b) in g_batch.iter().zip(&g_tape) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
