//! Threshold (Shamir) secret sharing over any [`Field`].
//!
//! Party `i` always evaluates at `x = i + 1`; the leader is party 0 and holds
//! the share at `x = 1`.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ShamirError {
    #[error("threshold must satisfy 1 < t <= n (got t = {t}, n = {n})")]
    BadThreshold { t: usize, n: usize },
    #[error("party count {0} does not fit the evaluation points of this field")]
    TooManyParties(usize),
    #[error("duplicate evaluation point x = {0}")]
    DuplicateX(u8),
    #[error("evaluation point x = 0 is reserved for the secret")]
    InvalidX,
    #[error("no points to interpolate")]
    Empty,
}

/// An evaluation `(x, y)` of a sharing polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Share<F> {
    pub x: u8,
    pub y: F,
}

impl<F: Field> Share<F> {
    pub fn for_party(party: usize, y: F) -> Self {
        Share {
            x: (party + 1) as u8,
            y,
        }
    }

    pub fn party(&self) -> usize {
        self.x as usize - 1
    }

    /// 1-byte `x` followed by the 16-byte field encoding of `y`.
    pub fn to_bytes(&self) -> [u8; 17] {
        let mut out = [0u8; 17];
        out[0] = self.x;
        out[1..].copy_from_slice(&self.y.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 17]) -> Option<Self> {
        let y = F::from_slice(&bytes[1..]).ok()?;
        (bytes[0] != 0).then_some(Share { x: bytes[0], y })
    }
}

/// Coefficients `a_0 .. a_{t-1}`; the constant term is the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingPolynomial<F> {
    coefficients: Vec<F>,
}

impl<F: Field> SharingPolynomial<F> {
    pub fn from_coefficients(coefficients: Vec<F>) -> Self {
        SharingPolynomial { coefficients }
    }

    pub fn random<R: RngCore + ?Sized>(secret: F, t: usize, rng: &mut R) -> Self {
        let mut coefficients = Vec::with_capacity(t);
        coefficients.push(secret);
        coefficients.extend((1..t).map(|_| F::random(rng)));
        SharingPolynomial { coefficients }
    }

    pub fn zero<R: RngCore + ?Sized>(t: usize, rng: &mut R) -> Self {
        Self::random(F::ZERO, t, rng)
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    pub fn secret(&self) -> F {
        self.coefficients.first().copied().unwrap_or(F::ZERO)
    }

    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn eval(&self, x: F) -> F {
        self.coefficients
            .iter()
            .rev()
            .fold(F::ZERO, |acc, &c| acc * x + c)
    }

    pub fn eval_party(&self, party: usize) -> F {
        self.eval(F::from_u64(party as u64 + 1))
    }

    pub fn shares(&self, n: usize) -> Vec<Share<F>> {
        (0..n)
            .map(|i| Share::for_party(i, self.eval_party(i)))
            .collect()
    }
}

pub(crate) fn check_params<F: Field>(t: usize, n: usize) -> Result<(), ShamirError> {
    if t <= 1 || t > n {
        return Err(ShamirError::BadThreshold { t, n });
    }
    if n > u8::MAX as usize || (n as u128 + 1) >= F::modulus() {
        return Err(ShamirError::TooManyParties(n));
    }
    Ok(())
}

pub fn share_secret<F: Field, R: RngCore + ?Sized>(
    secret: F,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Share<F>>, ShamirError> {
    check_params::<F>(t, n)?;
    Ok(SharingPolynomial::random(secret, t, rng).shares(n))
}

pub fn share_with_polynomial<F: Field>(
    poly: &SharingPolynomial<F>,
    n: usize,
) -> Result<Vec<Share<F>>, ShamirError> {
    check_params::<F>(poly.threshold(), n)?;
    Ok(poly.shares(n))
}

/// Shares of zero, for re-randomising an existing sharing without changing
/// its secret.
pub fn zero_shares<F: Field, R: RngCore + ?Sized>(
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Share<F>>, ShamirError> {
    share_secret(F::ZERO, t, n, rng)
}

fn check_distinct<F>(points: &[Share<F>]) -> Result<(), ShamirError> {
    if points.is_empty() {
        return Err(ShamirError::Empty);
    }
    let mut seen = [false; 256];
    for p in points {
        if p.x == 0 {
            return Err(ShamirError::InvalidX);
        }
        if core::mem::replace(&mut seen[p.x as usize], true) {
            return Err(ShamirError::DuplicateX(p.x));
        }
    }
    Ok(())
}

/// Lagrange basis coefficients `L_j(x0)` for the nodes `xs`.
///
/// The caller guarantees distinct nodes; their pairwise differences must be
/// units of the ring (always true for small positive integers here).
pub fn lagrange_coefficients<F: Field>(xs: &[F], x0: F) -> Vec<F> {
    let mut out = Vec::with_capacity(xs.len());
    for (j, &xj) in xs.iter().enumerate() {
        let mut num = F::ONE;
        let mut den = F::ONE;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                num *= x0 - xm;
                den *= xj - xm;
            }
        }
        out.push(
            num * den
                .inverse()
                .expect("distinct small nodes differ by a unit"),
        );
    }
    out
}

/// Value at `x0` of the unique polynomial of degree `< points.len()` through
/// `points`.
pub fn lagrange_at<F: Field>(points: &[Share<F>], x0: F) -> Result<F, ShamirError> {
    check_distinct(points)?;
    let xs: Vec<F> = points.iter().map(|p| F::from_u64(p.x as u64)).collect();
    let coeffs = lagrange_coefficients(&xs, x0);
    Ok(points.iter().zip(coeffs).map(|(p, c)| p.y * c).sum())
}

/// Recovers the coefficient form of the polynomial through `points`.
pub fn interpolate<F: Field>(points: &[Share<F>]) -> Result<SharingPolynomial<F>, ShamirError> {
    check_distinct(points)?;
    let k = points.len();
    let xs: Vec<F> = points.iter().map(|p| F::from_u64(p.x as u64)).collect();
    let mut coefficients = vec![F::ZERO; k];
    for (j, p) in points.iter().enumerate() {
        // basis numerator prod_{m != j} (X - x_m), built incrementally
        let mut basis = vec![F::ZERO; k];
        basis[0] = F::ONE;
        let mut deg = 0;
        let mut den = F::ONE;
        for (m, &xm) in xs.iter().enumerate() {
            if m == j {
                continue;
            }
            for d in (0..=deg).rev() {
                let c = basis[d];
                basis[d + 1] += c;
                basis[d] = -(c * xm);
            }
            deg += 1;
            den *= xs[j] - xm;
        }
        let scale = p.y
            * den
                .inverse()
                .expect("distinct small nodes differ by a unit");
        for (c, b) in coefficients.iter_mut().zip(basis) {
            *c += b * scale;
        }
    }
    Ok(SharingPolynomial { coefficients })
}

/// Outcome of [`reconstruct_with_trace`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceResult<F> {
    pub secret_matched: bool,
    /// Party indices whose shares lie on the matched polynomial, ascending.
    pub holders: Vec<usize>,
    pub polynomial: Option<SharingPolynomial<F>>,
    /// A second subset reconstructed the expected secret through a point
    /// that is off the first polynomial. Needs a `~2^-128` coincidence.
    pub ambiguous: bool,
}

impl<F> TraceResult<F> {
    fn unmatched() -> Self {
        TraceResult {
            secret_matched: false,
            holders: Vec::new(),
            polynomial: None,
            ambiguous: false,
        }
    }
}

struct SubsetPlan<F> {
    /// Candidate party indices (1..n) joined with the leader's own share.
    members: Vec<u8>,
    at_zero: Vec<F>,
    /// `at_party[i]` evaluates the subset's polynomial at `x = i + 1`.
    at_party: Vec<Vec<F>>,
}

/// Precomputed Lagrange weights for every `(t-1)`-subset of the `n-1`
/// candidate shares, in lexicographic order.
///
/// Building the plan once per session turns each trace into dot products.
pub struct TracePlan<F> {
    n: usize,
    t: usize,
    subsets: Vec<SubsetPlan<F>>,
}

impl<F: Field> TracePlan<F> {
    pub fn new(n: usize, t: usize) -> Result<Self, ShamirError> {
        check_params::<F>(t, n)?;
        let mut subsets = Vec::new();
        let mut combo: Vec<usize> = (1..t).collect();
        loop {
            let mut members = Vec::with_capacity(t);
            members.push(0u8);
            members.extend(combo.iter().map(|&c| c as u8));
            let xs: Vec<F> = members.iter().map(|&m| F::from_u64(m as u64 + 1)).collect();
            let at_zero = lagrange_coefficients(&xs, F::ZERO);
            let at_party = (0..n)
                .map(|i| lagrange_coefficients(&xs, F::from_u64(i as u64 + 1)))
                .collect();
            subsets.push(SubsetPlan {
                members,
                at_zero,
                at_party,
            });
            if !next_combination(&mut combo, n - 1) {
                break;
            }
        }
        Ok(TracePlan { n, t, subsets })
    }

    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    /// `shares[i]` is the value attributed to party `i`; `shares[0]` is the
    /// caller's own, always-correct share.
    pub fn trace(&self, shares: &[F], expected_secret: F) -> TraceResult<F> {
        assert_eq!(shares.len(), self.n, "one share per party");
        let dot = |members: &[u8], coeffs: &[F]| -> F {
            members
                .iter()
                .zip(coeffs)
                .map(|(&m, &c)| shares[m as usize] * c)
                .sum()
        };
        let Some(pos) = self
            .subsets
            .iter()
            .position(|s| dot(&s.members, &s.at_zero) == expected_secret)
        else {
            return TraceResult::unmatched();
        };
        let hit = &self.subsets[pos];
        let mut on_poly = [false; 256];
        let holders: Vec<usize> = (0..self.n)
            .filter(|&i| {
                let member = hit.members.contains(&(i as u8));
                let on = member || dot(&hit.members, &hit.at_party[i]) == shares[i];
                on_poly[i] = on;
                on
            })
            .collect();
        // Any later subset made only of holders reproduces the same polynomial;
        // one that reaches the secret through an off-polynomial share cannot be
        // reconciled with the first.
        let ambiguous = self.subsets[pos + 1..].iter().any(|s| {
            !s.members.iter().all(|&m| on_poly[m as usize])
                && dot(&s.members, &s.at_zero) == expected_secret
        });
        let points: Vec<Share<F>> = hit
            .members
            .iter()
            .map(|&m| Share::for_party(m as usize, shares[m as usize]))
            .collect();
        TraceResult {
            secret_matched: true,
            holders,
            polynomial: interpolate(&points).ok(),
            ambiguous,
        }
    }
}

/// Advances `combo` (strictly increasing values in `1..=max`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], max: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < max - (k - 1 - i) {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One-shot traced reconstruction. `own` must be the share at `x = 1` and
/// `others` the `n-1` candidates at `x = 2..=n`.
pub fn reconstruct_with_trace<F: Field>(
    own: Share<F>,
    others: &[Share<F>],
    t: usize,
    expected_secret: F,
) -> Result<TraceResult<F>, ShamirError> {
    let n = others.len() + 1;
    if own.x != 1 {
        return Err(ShamirError::InvalidX);
    }
    let mut shares = vec![F::ZERO; n];
    shares[0] = own.y;
    let mut seen = vec![false; n];
    for s in others {
        let idx = s.x as usize;
        if idx < 2 || idx > n {
            return Err(ShamirError::InvalidX);
        }
        if core::mem::replace(&mut seen[idx - 1], true) {
            return Err(ShamirError::DuplicateX(s.x));
        }
        shares[idx - 1] = s.y;
    }
    let plan = TracePlan::new(n, t)?;
    Ok(plan.trace(&shares, expected_secret))
}
