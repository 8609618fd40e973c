//! Gated recurrent unit with reset applied before the recurrent product:
//!
//! ```text
//! z  = σ(W_xz·x + U_hz·h + b_z)
//! r  = σ(W_xr·x + U_hr·h + b_r)
//! h~ = tanh(W·x + U·(r ⊙ h) + b_h)
//! h' = (1 - z) ⊙ h + z ⊙ h~
//! ```

use crate::error::{Error, Result};
use crate::tensor::{matvec_into, matvec_t_acc, outer_acc, sigmoid, Scalar, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct GruCellParams<T: Scalar> {
    /// `[units×input_dim]`
    pub w_xz: Tensor<T>,
    pub w_xr: Tensor<T>,
    pub w_xh: Tensor<T>,
    /// `[units×units]`
    pub u_hz: Tensor<T>,
    pub u_hr: Tensor<T>,
    pub u_hh: Tensor<T>,
    /// `[units]`
    pub b_z: Tensor<T>,
    pub b_r: Tensor<T>,
    pub b_h: Tensor<T>,
}

pub const GRU_PARAM_NAMES: [&str; 9] = [
    "w_xz", "w_xr", "w_xh", "u_hz", "u_hr", "u_hh", "b_z", "b_r", "b_h",
];

impl<T: Scalar> GruCellParams<T> {
    pub fn zeros(input_dim: usize, units: usize) -> Self {
        let w = || Tensor::zeros(&[units, input_dim]);
        let u = || Tensor::zeros(&[units, units]);
        let b = || Tensor::zeros(&[units]);
        Self {
            w_xz: w(),
            w_xr: w(),
            w_xh: w(),
            u_hz: u(),
            u_hr: u(),
            u_hh: u(),
            b_z: b(),
            b_r: b(),
            b_h: b(),
        }
    }

    pub fn units(&self) -> usize {
        self.b_z.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_xz.shape().get(1).copied().unwrap_or(0)
    }

    /// Checks that all nine tensors agree on `units` and `input_dim`.
    pub fn validate(&self) -> Result<(usize, usize)> {
        let units = self.units();
        let input_dim = self.input_dim();
        let expect = |t: &Tensor<T>, shape: &[usize]| {
            if t.shape() == shape {
                Ok(())
            } else {
                Err(Error::ShapeMismatch {
                    op: "gru params",
                    left: t.shape().to_vec(),
                    right: shape.to_vec(),
                })
            }
        };
        for w in [&self.w_xz, &self.w_xr, &self.w_xh] {
            expect(w, &[units, input_dim])?;
        }
        for u in [&self.u_hz, &self.u_hr, &self.u_hh] {
            expect(u, &[units, units])?;
        }
        for b in [&self.b_z, &self.b_r, &self.b_h] {
            expect(b, &[units])?;
        }
        Ok((input_dim, units))
    }

    pub fn tensors(&self) -> [&Tensor<T>; 9] {
        [
            &self.w_xz, &self.w_xr, &self.w_xh, &self.u_hz, &self.u_hr, &self.u_hh, &self.b_z,
            &self.b_r, &self.b_h,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<T>; 9] {
        [
            &mut self.w_xz,
            &mut self.w_xr,
            &mut self.w_xh,
            &mut self.u_hz,
            &mut self.u_hr,
            &mut self.u_hh,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }
}

/// Everything one step needs for backward.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStepCache<T> {
    pub x: Vec<T>,
    pub h_prev: Vec<T>,
    pub z: Vec<T>,
    pub r: Vec<T>,
    pub h_cand: Vec<T>,
}

pub fn gru_cell_step<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    p: &GruCellParams<T>,
) -> Result<(Vec<T>, GruStepCache<T>)> {
    let (input_dim, units) = p.validate()?;
    if x.len() != input_dim || h_prev.len() != units {
        return Err(Error::ShapeMismatch {
            op: "gru step",
            left: vec![x.len(), h_prev.len()],
            right: vec![input_dim, units],
        });
    }
    Ok(step_unchecked(x, h_prev, p, input_dim, units))
}

fn step_unchecked<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    p: &GruCellParams<T>,
    input_dim: usize,
    units: usize,
) -> (Vec<T>, GruStepCache<T>) {
    let mut tmp = vec![T::zero(); units];
    let gate = |w: &Tensor<T>, u: &Tensor<T>, b: &Tensor<T>, h: &[T], tmp: &mut Vec<T>| {
        let mut a = vec![T::zero(); units];
        matvec_into(w.data(), input_dim, x, &mut a);
        matvec_into(u.data(), units, h, tmp);
        for ((a, &t), &b) in a.iter_mut().zip(tmp.iter()).zip(b.data()) {
            *a = *a + t + b;
        }
        a
    };
    let z: Vec<T> = gate(&p.w_xz, &p.u_hz, &p.b_z, h_prev, &mut tmp)
        .into_iter()
        .map(sigmoid)
        .collect();
    let r: Vec<T> = gate(&p.w_xr, &p.u_hr, &p.b_r, h_prev, &mut tmp)
        .into_iter()
        .map(sigmoid)
        .collect();
    let rh: Vec<T> = r.iter().zip(h_prev).map(|(&r, &h)| r * h).collect();
    let h_cand: Vec<T> = gate(&p.w_xh, &p.u_hh, &p.b_h, &rh, &mut tmp)
        .into_iter()
        .map(|a| a.tanh())
        .collect();
    let h: Vec<T> = (0..units)
        .map(|i| (T::one() - z[i]) * h_prev[i] + z[i] * h_cand[i])
        .collect();
    let cache = GruStepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        h_cand,
    };
    (h, cache)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruLayer<T: Scalar> {
    pub params: GruCellParams<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruCache<T> {
    pub steps: Vec<GruStepCache<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruGrads<T: Scalar> {
    pub params: GruCellParams<T>,
    /// `[T×input_dim]`
    pub input: Tensor<T>,
    pub h0: Vec<T>,
}

impl<T: Scalar> GruLayer<T> {
    pub fn new(params: GruCellParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Runs the cell left to right over `seq` (`[T×input_dim]`) and returns
    /// every hidden state as `[T×units]`.
    pub fn forward(&self, seq: &Tensor<T>, h0: Option<&[T]>) -> Result<(Tensor<T>, GruCache<T>)> {
        let (input_dim, units) = self.params.validate()?;
        let (steps, dim) = seq.dims2().map_err(|_| Error::EmptySequence)?;
        if dim != input_dim {
            return Err(Error::ShapeMismatch {
                op: "gru layer",
                left: seq.shape().to_vec(),
                right: vec![steps, input_dim],
            });
        }
        let mut h = match h0 {
            Some(h0) if h0.len() != units => {
                return Err(Error::ShapeMismatch {
                    op: "gru initial state",
                    left: vec![h0.len()],
                    right: vec![units],
                })
            }
            Some(h0) => h0.to_vec(),
            None => vec![T::zero(); units],
        };
        let mut out = Vec::with_capacity(steps * units);
        let mut caches = Vec::with_capacity(steps);
        for x in seq.data().chunks_exact(input_dim) {
            let (next, cache) = step_unchecked(x, &h, &self.params, input_dim, units);
            out.extend_from_slice(&next);
            caches.push(cache);
            h = next;
        }
        Ok((
            Tensor::from_parts(vec![steps, units], out),
            GruCache { steps: caches },
        ))
    }

    /// Backpropagation through time over every unrolled step.
    pub fn backward(&self, cache: &GruCache<T>, upstream: &Tensor<T>) -> Result<GruGrads<T>> {
        let (input_dim, units) = self.params.validate()?;
        let steps = cache.steps.len();
        if steps == 0 {
            return Err(Error::EmptySequence);
        }
        if upstream.shape() != [steps, units] {
            return Err(Error::CacheMismatch(format!(
                "gru upstream {:?}, expected [{steps}, {units}]",
                upstream.shape()
            )));
        }
        let p = &self.params;
        let mut g = GruCellParams::zeros(input_dim, units);
        let mut dx_all = vec![T::zero(); steps * input_dim];
        let mut dh_next = vec![T::zero(); units];
        let mut da_z = vec![T::zero(); units];
        let mut da_r = vec![T::zero(); units];
        let mut da_h = vec![T::zero(); units];
        let mut d_rh = vec![T::zero(); units];

        for t in (0..steps).rev() {
            let c = &cache.steps[t];
            let up = &upstream.data()[t * units..(t + 1) * units];
            let mut dh_prev = vec![T::zero(); units];
            for i in 0..units {
                let dh = up[i] + dh_next[i];
                let z = c.z[i];
                let hc = c.h_cand[i];
                dh_prev[i] = dh * (T::one() - z);
                da_z[i] = dh * (hc - c.h_prev[i]) * z * (T::one() - z);
                da_h[i] = dh * z * (T::one() - hc * hc);
            }
            // Candidate branch.
            let rh: Vec<T> = c.r.iter().zip(&c.h_prev).map(|(&r, &h)| r * h).collect();
            outer_acc(g.w_xh.data_mut(), &da_h, &c.x);
            outer_acc(g.u_hh.data_mut(), &da_h, &rh);
            d_rh.iter_mut().for_each(|v| *v = T::zero());
            matvec_t_acc(p.u_hh.data(), units, &da_h, &mut d_rh);
            for i in 0..units {
                let r = c.r[i];
                da_r[i] = d_rh[i] * c.h_prev[i] * r * (T::one() - r);
                dh_prev[i] = dh_prev[i] + d_rh[i] * r;
            }
            // Gates.
            outer_acc(g.w_xz.data_mut(), &da_z, &c.x);
            outer_acc(g.u_hz.data_mut(), &da_z, &c.h_prev);
            outer_acc(g.w_xr.data_mut(), &da_r, &c.x);
            outer_acc(g.u_hr.data_mut(), &da_r, &c.h_prev);
            matvec_t_acc(p.u_hz.data(), units, &da_z, &mut dh_prev);
            matvec_t_acc(p.u_hr.data(), units, &da_r, &mut dh_prev);
            for (b, d) in [
                (&mut g.b_z, &da_z),
                (&mut g.b_r, &da_r),
                (&mut g.b_h, &da_h),
            ] {
                for (bv, &dv) in b.data_mut().iter_mut().zip(d.iter()) {
                    *bv = *bv + dv;
                }
            }
            let dx = &mut dx_all[t * input_dim..(t + 1) * input_dim];
            matvec_t_acc(p.w_xz.data(), input_dim, &da_z, dx);
            matvec_t_acc(p.w_xr.data(), input_dim, &da_r, dx);
            matvec_t_acc(p.w_xh.data(), input_dim, &da_h, dx);
            dh_next = dh_prev;
        }
        Ok(GruGrads {
            params: g,
            input: Tensor::from_parts(vec![steps, input_dim], dx_all),
            h0: dh_next,
        })
    }
}
