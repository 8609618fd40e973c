//! Dense row-major tensors and the handful of primitives the layers need.
//!
//! There is no broadcasting: every binary op requires identical (or
//! matmul-compatible) shapes and reports both shapes when they disagree.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Real scalar used for tensor storage. Implemented for `f32` (training) and
/// `f64` (gradient checks).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Relu => relu(x),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_from_output<T: Scalar>(self, y: T) -> T {
        match self {
            Activation::Sigmoid => y * (T::one() - y),
            Activation::Tanh => T::one() - y * y,
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    // Split on sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[inline]
pub fn relu<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

#[derive(Clone, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Debug for Tensor<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Tensor{:?}", self.shape)?;
        if self.data.len() <= 16 {
            write!(f, " {:?}", self.data)?;
        }
        Ok(())
    }
}

impl<T: Scalar> Tensor<T> {
    /// Builds a tensor from external data, rejecting bad shapes and
    /// non-finite values.
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidTensor(format!(
                "shape {shape:?} must have positive extents"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::InvalidTensor(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { shape, data })
    }

    /// Internal constructor for results of already-validated computations.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<T>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::from_parts(shape.to_vec(), vec![T::zero(); shape.iter().product()])
    }

    pub fn filled(shape: &[usize], value: T) -> Self {
        Self::from_parts(shape.to_vec(), vec![value; shape.iter().product()])
    }

    pub fn vector(data: Vec<T>) -> Result<Self> {
        Self::new(vec![data.len()], data)
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = T::one();
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Rows and columns of a rank-2 tensor.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            &[r, c] => Ok((r, c)),
            other => Err(Error::InvalidTensor(format!(
                "expected a matrix, got shape {other:?}"
            ))),
        }
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::ShapeMismatch {
                op: "reshape",
                left: self.shape,
                right: shape,
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn get2(&self, r: usize, c: usize) -> T {
        self.data[r * self.shape[1] + c]
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor::from_parts(
            self.shape.clone(),
            self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        )
    }

    pub fn map(&self, f: Activation) -> Self {
        Self::from_parts(
            self.shape.clone(),
            self.data.iter().map(|&v| f.apply(v)).collect(),
        )
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same("hadamard", other)?;
        Ok(Self::from_parts(
            self.shape.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a * b)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same("add", other)?;
        Ok(Self::from_parts(
            self.shape.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        ))
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_same("add_assign", other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
        Ok(())
    }

    pub fn scale(&mut self, k: T) {
        for v in &mut self.data {
            *v = *v * k;
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    /// Standard matrix product of `[m×k]` and `[k×n]`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let mismatch = || Error::ShapeMismatch {
            op: "matmul",
            left: self.shape.clone(),
            right: other.shape.clone(),
        };
        let (m, k) = self.dims2().map_err(|_| mismatch())?;
        let (k2, n) = other.dims2().map_err(|_| mismatch())?;
        if k != k2 {
            return Err(mismatch());
        }
        let mut out = vec![T::zero(); m * n];
        for i in 0..m {
            let row = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                let b_row = &other.data[p * n..(p + 1) * n];
                for (o, &b) in row.iter_mut().zip(b_row) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(Self::from_parts(vec![m, n], out))
    }

    fn check_same(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }
}

/// `out = W·x` for a row-major `[rows×cols]` matrix.
#[inline]
pub(crate) fn matvec_into<T: Scalar>(w: &[T], cols: usize, x: &[T], out: &mut [T]) {
    debug_assert_eq!(x.len(), cols);
    for (o, row) in out.iter_mut().zip(w.chunks_exact(cols)) {
        *o = row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    }
}

/// `out += Wᵀ·g` for a row-major `[rows×cols]` matrix.
#[inline]
pub(crate) fn matvec_t_acc<T: Scalar>(w: &[T], cols: usize, g: &[T], out: &mut [T]) {
    debug_assert_eq!(out.len(), cols);
    for (&gi, row) in g.iter().zip(w.chunks_exact(cols)) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o = *o + a * gi;
        }
    }
}

/// `dw += g ⊗ x`.
#[inline]
pub(crate) fn outer_acc<T: Scalar>(dw: &mut [T], g: &[T], x: &[T]) {
    let cols = x.len();
    for (&gi, row) in g.iter().zip(dw.chunks_exact_mut(cols)) {
        for (d, &xj) in row.iter_mut().zip(x) {
            *d = *d + gi * xj;
        }
    }
}
