//! Unitary DFT along the time axis, circulant time operators and frequency filters.
//!
//! Atoms are `ψ_u(t) = T^{−1/2} e^{+i2πut/T}`; the forward transform is
//! `F = Ψ* L`, so it carries the analysis sign `e^{−i2πut/T}`. Frequency
//! index `u` stands for the cyclic frequency `u/T`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::dense::{ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};
use crate::is_power_of_two;

/// Imaginary parts below this are dropped when a filtered stream is returned as real.
pub const RESIDUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierBasis {
    len: usize,
}

fn twiddle(k: usize, n: usize, sign: f64) -> Complex64 {
    let angle = sign * 2.0 * PI * k as f64 / n as f64;
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// Twiddles `e^{sign·i2πk/N}` for `k < N/2`.
fn twiddle_table(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n / 2).map(|k| twiddle(k, n, sign)).collect()
}

/// In-place iterative radix-2 FFT, unnormalized; `table` comes from
/// [`twiddle_table`] for `x.len()` and fixes the kernel sign.
fn fft_in_place(x: &mut [Complex64], table: &[Complex64]) {
    let n = x.len();
    debug_assert!(is_power_of_two(n) && table.len() == n / 2);
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            x.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let w = table[k * step];
                let a = x[start + k];
                let b = x[start + k + half] * w;
                x[start + k] = a + b;
                x[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

/// Precomputed unnormalized DFT of one length and sign.
enum Plan {
    Radix2 { table: Vec<Complex64> },
    /// Chirp-z: a circular convolution with `c_k = e^{sign·iπk²/N}` through
    /// power-of-two FFTs of size `≥ 2N − 1`.
    Bluestein { chirp: Vec<Complex64>, kernel: Vec<Complex64>, forward: Vec<Complex64>, backward: Vec<Complex64> },
}

impl Plan {
    fn new(n: usize, sign: f64) -> Self {
        if is_power_of_two(n) {
            return Plan::Radix2 { table: twiddle_table(n, sign) };
        }
        let l = (2 * n - 1).next_power_of_two();
        // k² mod 2N keeps the chirp angle in [0, 2π)
        let chirp: Vec<Complex64> = (0..n).map(|k| twiddle((k * k) % (2 * n), 2 * n, sign)).collect();
        let forward = twiddle_table(l, -1.0);
        let backward = twiddle_table(l, 1.0);
        let mut kernel = vec![Complex64::new(0.0, 0.0); l];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[l - k] = chirp[k].conj();
        }
        fft_in_place(&mut kernel, &forward);
        let inv = 1.0 / l as f64;
        for v in kernel.iter_mut() {
            *v *= inv;
        }
        Plan::Bluestein { chirp, kernel, forward, backward }
    }

    fn run(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self {
            Plan::Radix2 { table } => {
                let mut buf = x.to_vec();
                fft_in_place(&mut buf, table);
                buf
            }
            Plan::Bluestein { chirp, kernel, forward, backward } => {
                let mut a = vec![Complex64::new(0.0, 0.0); kernel.len()];
                for (ak, (&xk, &ck)) in a.iter_mut().zip(x.iter().zip(chirp)) {
                    *ak = xk * ck;
                }
                fft_in_place(&mut a, forward);
                for (ak, bk) in a.iter_mut().zip(kernel) {
                    *ak *= bk;
                }
                fft_in_place(&mut a, backward);
                a.iter().zip(chirp).map(|(&ak, &ck)| ak * ck).collect()
            }
        }
    }
}

/// Direct `O(T²)` DFT, unnormalized, kernel `e^{sign·i2πut/T}`.
fn dft_direct(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|u| x.iter().enumerate().map(|(t, &v)| v * twiddle((u * t) % n, n, sign)).sum())
        .collect()
}

impl FourierBasis {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("time window must hold at least one sample".into()));
        }
        Ok(Self { len })
    }

    /// Window length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Cyclic frequency `u/T`.
    pub fn frequency(&self, u: usize) -> f64 {
        u as f64 / self.len as f64
    }

    /// Index of the conjugate partner of `u`.
    pub fn partner(&self, u: usize) -> usize {
        (self.len - u) % self.len
    }

    fn transform_with(&self, plan: &Plan, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.len, "signal length");
        let scale = 1.0 / libm::sqrt(self.len as f64);
        let mut out = plan.run(x);
        for v in out.iter_mut() {
            *v *= scale;
        }
        out
    }

    fn transform(&self, x: &[Complex64], sign: f64) -> Vec<Complex64> {
        self.transform_with(&Plan::new(self.len, sign), x)
    }

    /// `Ψ* x`.
    pub fn forward_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.transform(x, -1.0)
    }

    /// `Ψ x`.
    pub fn inverse_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.transform(x, 1.0)
    }

    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_vec(&buf)
    }

    /// Forward transform by the direct sum regardless of `T`.
    pub fn forward_direct(&self, x: &[Complex64]) -> Vec<Complex64> {
        let scale = 1.0 / libm::sqrt(self.len as f64);
        dft_direct(x, -1.0).into_iter().map(|v| v * scale).collect()
    }

    fn map_columns(&self, m: &ComplexMatrix, sign: f64) -> Result<ComplexMatrix> {
        if m.rows() != self.len {
            return Err(Error::DimensionMismatch { what: "time samples", expected: self.len, found: m.rows() });
        }
        let plan = Plan::new(self.len, sign);
        let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
        for c in 0..m.cols() {
            out.set_column(c, &self.transform_with(&plan, &m.column(c)));
        }
        Ok(out)
    }

    /// `F = Ψ* L`, column by column.
    pub fn forward(&self, l: &RealMatrix) -> Result<ComplexMatrix> {
        self.map_columns(&l.to_complex(), -1.0)
    }

    pub fn forward_complex(&self, l: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.map_columns(l, -1.0)
    }

    /// `L = Ψ F`.
    pub fn inverse(&self, f: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.map_columns(f, 1.0)
    }

    /// Dense `Ψ` with `Ψ[t][u] = ψ_u(t)`.
    pub fn materialize(&self) -> ComplexMatrix {
        let scale = 1.0 / libm::sqrt(self.len as f64);
        ComplexMatrix::from_fn(self.len, self.len, |t, u| twiddle((u * t) % self.len, self.len, 1.0) * scale)
    }
}

/// Complex response `χ_u`, one entry per frequency index.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFilter {
    response: Vec<Complex64>,
}

impl FrequencyFilter {
    pub fn new(response: Vec<Complex64>) -> Self {
        Self { response }
    }

    pub fn from_real(response: &[f64]) -> Self {
        Self { response: response.iter().map(|&r| Complex64::new(r, 0.0)).collect() }
    }

    pub fn all_pass(len: usize) -> Self {
        Self::from_real(&vec![1.0; len])
    }

    /// Keeps the frequencies with `min(u, T − u)/T ≤ cutoff`.
    pub fn lowpass(len: usize, cutoff: f64) -> Self {
        let r: Vec<f64> = (0..len)
            .map(|u| if (u.min(len - u) as f64 / len as f64) <= cutoff { 1.0 } else { 0.0 })
            .collect();
        Self::from_real(&r)
    }

    /// Indicator of frequency 0.
    pub fn dc(len: usize) -> Self {
        Self::from_real(&(0..len).map(|u| if u == 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>())
    }

    pub fn aggregation(len: usize, k: usize) -> Result<Self> {
        Ok(CirculantOperator::aggregation(len, k)?.response())
    }

    pub fn difference(len: usize) -> Result<Self> {
        Ok(CirculantOperator::difference(len)?.response())
    }

    /// Parse `lowpass:<cutoff>`, `agg:<k>`, `diff`, `allpass` or `dc`.
    pub fn preset(choice: &str, len: usize) -> Result<Self> {
        let (name, arg) = match choice.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (choice, None),
        };
        let bad = || Error::InvalidParameter(format!("unknown frequency filter preset `{choice}`"));
        match (name, arg) {
            ("allpass", None) => Ok(Self::all_pass(len)),
            ("dc", None) => Ok(Self::dc(len)),
            ("diff", None) => Self::difference(len),
            ("agg", Some(k)) => Self::aggregation(len, k.parse().map_err(|_| bad())?),
            ("lowpass", Some(c)) => {
                let cutoff: f64 = c.parse().map_err(|_| bad())?;
                if !(0.0..=0.5).contains(&cutoff) {
                    return Err(Error::InvalidParameter(format!("lowpass cutoff {cutoff} outside [0, 0.5]")));
                }
                Ok(Self::lowpass(len, cutoff))
            }
            _ => Err(bad()),
        }
    }

    pub fn response(&self) -> &[Complex64] {
        &self.response
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn product(&self, other: &Self) -> Self {
        Self { response: self.response.iter().zip(&other.response).map(|(a, b)| a * b).collect() }
    }

    /// `χ_{T−u} = conj(χ_u)` within `tol`; such filters map real streams to real streams.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let n = self.response.len();
        (0..n).all(|u| (self.response[(n - u) % n] - self.response[u].conj()).norm() <= tol)
    }

    fn check(&self, basis: &FourierBasis) -> Result<()> {
        if self.response.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                what: "frequency response",
                expected: basis.len(),
                found: self.response.len(),
            });
        }
        Ok(())
    }

    /// `Ψ diag(χ) Ψ* L` for complex `L`.
    pub fn apply_complex(&self, basis: &FourierBasis, l: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(basis)?;
        let mut f = basis.forward_complex(l)?;
        for (u, &chi) in self.response.iter().enumerate() {
            for v in f.row_mut(u) {
                *v *= chi;
            }
        }
        basis.inverse(&f)
    }

    /// `Ψ diag(χ) Ψ* L`; errors when the imaginary residue exceeds [`RESIDUE_TOLERANCE`].
    pub fn apply(&self, basis: &FourierBasis, l: &RealMatrix) -> Result<RealMatrix> {
        real_part_checked(&self.apply_complex(basis, &l.to_complex())?)
    }
}

/// Real part of `m`, rejecting imaginary parts above [`RESIDUE_TOLERANCE`].
pub fn real_part_checked(m: &ComplexMatrix) -> Result<RealMatrix> {
    let residue = m.max_imag();
    if residue >= RESIDUE_TOLERANCE {
        return Err(Error::ComplexResidue { residue });
    }
    Ok(m.re())
}

/// Circulant `T × T` operator given by its first column: `H[t][s] = c[(t − s) mod T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantOperator {
    column: Vec<f64>,
}

impl CirculantOperator {
    pub fn new(column: Vec<f64>) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::InvalidParameter("circulant operator needs T ≥ 1".into()));
        }
        Ok(Self { column })
    }

    /// `k`-sample aggregation: `(H L)_t = Σ_{m<k} L_{t−m}`.
    pub fn aggregation(len: usize, k: usize) -> Result<Self> {
        if k == 0 || k > len {
            return Err(Error::InvalidParameter(format!("aggregation width {k} outside 1..={len}")));
        }
        Self::new((0..len).map(|m| if m < k { 1.0 } else { 0.0 }).collect())
    }

    /// First difference: `(H L)_t = L_t − L_{t−1}`.
    pub fn difference(len: usize) -> Result<Self> {
        let mut c = vec![0.0; len];
        if len == 1 {
            return Self::new(c);
        }
        c[0] = 1.0;
        c[1] = -1.0;
        Self::new(c)
    }

    pub fn len(&self) -> usize {
        self.column.len()
    }

    pub fn is_empty(&self) -> bool {
        self.column.is_empty()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn materialize(&self) -> RealMatrix {
        let n = self.len();
        RealMatrix::from_fn(n, n, |t, s| self.column[(t + n - s) % n])
    }

    /// Eigenvalues under `Ψ`: `χ_u = Σ_m c[m] e^{−i2πum/T}`.
    pub fn response(&self) -> FrequencyFilter {
        let n = self.len();
        let chi = (0..n)
            .map(|u| self.column.iter().enumerate().map(|(m, &c)| twiddle((u * m) % n, n, -1.0) * c).sum())
            .collect();
        FrequencyFilter::new(chi)
    }

    /// `H L` in the time domain.
    pub fn apply(&self, l: &RealMatrix) -> Result<RealMatrix> {
        let n = self.len();
        if l.rows() != n {
            return Err(Error::DimensionMismatch { what: "time samples", expected: n, found: l.rows() });
        }
        let taps: Vec<(usize, f64)> = self.column.iter().copied().enumerate().filter(|&(_, c)| c != 0.0).collect();
        let mut out = RealMatrix::zeros(n, l.cols());
        for t in 0..n {
            let row = out.row_mut(t);
            for &(m, c) in &taps {
                for (o, &v) in row.iter_mut().zip(l.row((t + n - m) % n)) {
                    *o += c * v;
                }
            }
        }
        Ok(out)
    }
}
