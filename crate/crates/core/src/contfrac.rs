//! Continued fractions: the Gauss map, denominators, Brjuno–Yoccoz sums and
//! the composition words of pre-renormalization.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Default length of the quotient prefix for the named periodic numbers.
pub const DEFAULT_PREFIX: usize = 96;

/// An irrational rotation number carried as a prefix of partial quotients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationNumber {
    quotients: Vec<u64>,
    bound: Option<u64>,
}

impl RotationNumber {
    pub fn new(quotients: Vec<u64>, bound: Option<u64>) -> crate::Result<Self> {
        if quotients.is_empty() || quotients.iter().any(|&a| a == 0) {
            return Err(Error::InvalidInput("partial quotients must be positive".into()));
        }
        if let Some(m) = bound {
            if quotients.iter().any(|&a| a > m) {
                return Err(Error::InvalidInput(format!("quotient exceeds bound {m}")));
            }
        }
        Ok(Self { quotients, bound })
    }

    /// θ* = (√5 − 1)/2 = [1, 1, 1, …].
    pub fn golden(len: usize) -> Self {
        Self { quotients: vec![1; len.max(1)], bound: Some(1) }
    }

    /// √2 − 1 = [2, 2, 2, …].
    pub fn sqrt2m1(len: usize) -> Self {
        Self { quotients: vec![2; len.max(1)], bound: Some(2) }
    }

    /// Expands a decimal in (0, 1) by the Gauss map. Only the quotients
    /// resolved by double precision are kept.
    pub fn from_decimal(x: f64, max_len: usize) -> crate::Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidInput(format!("rotation number {x} must lie in (0, 1)")));
        }
        let mut q = Vec::new();
        // track the interval of reals consistent with x to stop once the
        // quotients stop being determined
        let (mut lo, mut hi) = (x * (1.0 - 1e-15), x * (1.0 + 1e-15));
        while q.len() < max_len {
            let (a, b) = (1.0 / hi, 1.0 / lo);
            if a.floor() != b.floor() || !a.is_finite() {
                break;
            }
            let k = a.floor();
            q.push(k as u64);
            let (nlo, nhi) = (a - k, b - k);
            if nlo <= 0.0 {
                break;
            }
            lo = nlo;
            hi = nhi;
        }
        if q.is_empty() {
            return Err(Error::RationalInput { value: x, denominator: 1 });
        }
        Self::new(q, None)
    }

    /// Parses `golden`, `sqrt2m1`, a comma-separated quotient list, or a
    /// decimal. Decimal input returns a warning string.
    pub fn parse(spec: &str, len: usize) -> crate::Result<(Self, Option<String>)> {
        let s = spec.trim();
        match s {
            "golden" => return Ok((Self::golden(len), None)),
            "sqrt2m1" => return Ok((Self::sqrt2m1(len), None)),
            _ => {}
        }
        if s.contains(',') || (!s.contains('.') && s.parse::<u64>().is_ok()) {
            let q: Result<Vec<u64>, _> = s.split(',').map(|t| t.trim().parse::<u64>()).collect();
            let q = q.map_err(|e| Error::InvalidInput(format!("quotient list {s:?}: {e}")))?;
            return Ok((Self::new(q, None)?, None));
        }
        let x: f64 = s.parse().map_err(|_| Error::InvalidInput(format!("unrecognized rotation number {s:?}")))?;
        let r = Self::from_decimal(x, len)?;
        let warn = format!("decimal rotation number {x} expanded to {} quotients", r.len());
        Ok((r, Some(warn)))
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn bound(&self) -> Option<u64> {
        self.bound
    }

    /// a_k, 1-based.
    pub fn quotient(&self, k: usize) -> crate::Result<u64> {
        if k == 0 || k > self.len() {
            return Err(Error::InsufficientPrefix { needed: k, available: self.len() });
        }
        Ok(self.quotients[k - 1])
    }

    /// θ_j = G^j(θ) evaluated from the prefix `[a_{j+1}, a_{j+2}, …]`.
    pub fn theta(&self, j: usize) -> crate::Result<f64> {
        if j >= self.len() {
            return Err(Error::InsufficientPrefix { needed: j + 1, available: self.len() });
        }
        Ok(self.quotients[j..].iter().rev().fold(0.0, |t, &a| 1.0 / (a as f64 + t)))
    }

    pub fn value(&self) -> f64 {
        self.theta(0).expect("non-empty prefix")
    }

    /// One Gauss step on the quotient prefix: drops a₁.
    pub fn gauss(&self) -> crate::Result<Self> {
        self.shift(1)
    }

    /// The number with the first `k` quotients removed.
    pub fn shift(&self, k: usize) -> crate::Result<Self> {
        if k >= self.len() {
            return Err(Error::InsufficientPrefix { needed: k + 1, available: self.len() });
        }
        Ok(Self { quotients: self.quotients[k..].to_vec(), bound: self.bound })
    }
}

/// The Gauss map θ ↦ {1/θ}. Rejects θ whose image is rational with
/// denominator at most `floor` (the next step would be undefined or
/// periodic at a rational).
pub fn gauss(theta: f64, floor: u64) -> crate::Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidInput(format!("θ = {theta} must lie in (0, 1)")));
    }
    let inv = 1.0 / theta;
    let y = inv - inv.floor();
    for q in 1..=floor.max(1) {
        let p = (y * q as f64).round();
        if (y * q as f64 - p).abs() < 1e-10 * q as f64 && (p == 0.0 || p < q as f64) {
            return Err(Error::RationalInput { value: theta, denominator: q });
        }
    }
    Ok(y)
}

/// q_0, …, q_n from q_{k+1} = a_{k+1} q_k + q_{k−1}, q₋₁ = 0, q₀ = 1.
pub fn denominators(theta: &RotationNumber, n: usize) -> crate::Result<Vec<u64>> {
    if n > theta.len() {
        return Err(Error::InsufficientPrefix { needed: n, available: theta.len() });
    }
    let mut q = vec![1u64];
    let mut prev = 0u64;
    for k in 0..n {
        let next = theta.quotients[k] * q[k] + prev;
        prev = q[k];
        q.push(next);
    }
    Ok(q)
}

/// Numerators p_0, …, p_n with p₋₁ = 1, p₀ = 0.
pub fn numerators(theta: &RotationNumber, n: usize) -> crate::Result<Vec<u64>> {
    if n > theta.len() {
        return Err(Error::InsufficientPrefix { needed: n, available: theta.len() });
    }
    let mut p = vec![0u64];
    let mut prev = 1u64;
    for k in 0..n {
        let next = theta.quotients[k] * p[k] + prev;
        prev = p[k];
        p.push(next);
    }
    Ok(p)
}

/// Y_m(θ) = Σ_{j=0}^m θ₋₁θ₀⋯θ_{j−1} log(1/θ_j), θ₋₁ = 1.
pub fn brjuno_sum(theta: &RotationNumber, m: usize) -> crate::Result<f64> {
    Ok(*brjuno_partials(theta, m)?.last().expect("m + 1 terms"))
}

/// Y_0, …, Y_m.
pub fn brjuno_partials(theta: &RotationNumber, m: usize) -> crate::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(m + 1);
    let mut beta = 1.0;
    let mut sum = 0.0;
    for j in 0..=m {
        let t = theta.theta(j)?;
        sum += beta * (1.0 / t).ln();
        beta *= t;
        out.push(sum);
    }
    Ok(out)
}

/// The two letters of a one- or two-dimensional pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Letter {
    Eta,
    Xi,
}

/// A composition word `(a₁, b₁, …, a_m, b_m)` denoting
/// `ξ^{b_m} ∘ η^{a_m} ∘ … ∘ ξ^{b₁} ∘ η^{a₁}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u64>);

impl MultiIndex {
    pub fn new(entries: Vec<u64>) -> crate::Result<Self> {
        if entries.len() % 2 != 0 || entries.is_empty() {
            return Err(Error::MalformedWord(format!("{entries:?} must have even positive length")));
        }
        Ok(Self(entries))
    }

    /// Builds the word from letters in application order (first applied first).
    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut out: Vec<u64> = vec![0, 0];
        for &l in letters {
            let last = out.len() - 1;
            match l {
                Letter::Eta => {
                    if out[last] > 0 {
                        out.push(1);
                        out.push(0);
                    } else {
                        out[last - 1] += 1;
                    }
                }
                Letter::Xi => out[last] += 1,
            }
        }
        Self(out)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    /// Number of blocks m.
    pub fn blocks(&self) -> usize {
        self.0.len() / 2
    }

    pub fn a(&self, j: usize) -> u64 {
        self.0[2 * (j - 1)]
    }

    pub fn b(&self, j: usize) -> u64 {
        self.0[2 * (j - 1) + 1]
    }

    /// Letters in application order.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for pair in self.0.chunks(2) {
            out.extend(std::iter::repeat(Letter::Eta).take(pair[0] as usize));
            out.extend(std::iter::repeat(Letter::Xi).take(pair[1] as usize));
        }
        out
    }

    /// (η-count, ξ-count).
    pub fn weight(&self) -> (u64, u64) {
        self.0.chunks(2).fold((0, 0), |(e, x), p| (e + p[0], x + p[1]))
    }

    /// Membership in the word space: a_j ≥ 1 for j ≥ 2, b_j ≥ 1 for j < m.
    pub fn is_admissible(&self) -> bool {
        let m = self.blocks();
        (2..=m).all(|j| self.a(j) >= 1) && (1..m).all(|j| self.b(j) >= 1)
    }

    /// Trailing structure: b_m = 0 and either a_m ≥ 2 or a_m = b_{m−1} = 1.
    pub fn has_trailing_structure(&self) -> bool {
        let m = self.blocks();
        if self.b(m) != 0 {
            return false;
        }
        self.a(m) >= 2 || (self.a(m) == 1 && m >= 2 && self.b(m - 1) == 1)
    }

    pub fn ends_with_one_one_zero(&self) -> bool {
        let m = self.blocks();
        m >= 2 && self.b(m) == 0 && self.a(m) == 1 && self.b(m - 1) == 1
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The word peeled off the end of s̄ by [`hat_index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selector {
    /// φ₀ = η², when a_m ≥ 2.
    EtaEta,
    /// φ₀ = η ∘ ξ, when a_m = b_{m−1} = 1.
    EtaXi,
}

impl Selector {
    /// φ₀ in application order.
    pub fn letters(&self) -> [Letter; 2] {
        match self {
            Selector::EtaEta => [Letter::Eta, Letter::Eta],
            Selector::EtaXi => [Letter::Xi, Letter::Eta],
        }
    }
}

/// Words (s̄_n, t̄_n) of the n-th pre-renormalization under the recursion
/// (η_{k+1}, ξ_{k+1}) = (η_k^{a_{k+1}} ∘ ξ_k, η_k).
pub fn multi_indices(theta: &RotationNumber, n: usize) -> crate::Result<(MultiIndex, MultiIndex)> {
    if n == 0 {
        return Err(Error::InvalidInput("depth n must be at least 1".into()));
    }
    if n > theta.len() {
        return Err(Error::InsufficientPrefix { needed: n, available: theta.len() });
    }
    let mut eta = vec![Letter::Eta];
    let mut xi = vec![Letter::Xi];
    for k in 0..n {
        let a = theta.quotients[k] as usize;
        let mut next = xi.clone();
        for _ in 0..a {
            next.extend_from_slice(&eta);
        }
        xi = std::mem::replace(&mut eta, next);
    }
    Ok((MultiIndex::from_letters(&eta), MultiIndex::from_letters(&xi)))
}

/// ŝ and the selector φ₀ with ζ^{s̄} = φ₀ ∘ ζ^{ŝ}.
pub fn hat_index(s: &MultiIndex) -> crate::Result<(MultiIndex, Selector)> {
    if !s.has_trailing_structure() {
        return Err(Error::MalformedWord(format!("{s} lacks the trailing structure b_m = 0, a_m ≥ 2 or a_m = b_(m-1) = 1")));
    }
    let sel = if s.a(s.blocks()) >= 2 { Selector::EtaEta } else { Selector::EtaXi };
    Ok((hat_with(s, sel)?, sel))
}

/// Removes φ₀ given by `sel` from the end of `w`.
pub fn hat_with(w: &MultiIndex, sel: Selector) -> crate::Result<MultiIndex> {
    let m = w.blocks();
    let mut e = w.0.clone();
    match sel {
        Selector::EtaEta => {
            if w.b(m) != 0 || w.a(m) < 2 {
                return Err(Error::MalformedWord(format!("{w} does not end in η²")));
            }
            e[2 * (m - 1)] -= 2;
        }
        Selector::EtaXi => {
            if m < 2 || w.b(m) != 0 || w.a(m) != 1 || w.b(m - 1) < 1 {
                return Err(Error::MalformedWord(format!("{w} does not end in η∘ξ")));
            }
            if w.b(m - 1) == 1 {
                e[2 * (m - 1)] = 0;
                e[2 * (m - 2) + 1] = 0;
            } else {
                e.truncate(2 * (m - 1));
                e[2 * (m - 2) + 1] -= 1;
            }
        }
    }
    Ok(MultiIndex(e))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const GOLD: f64 = 0.618_033_988_749_894_9;

    #[test]
    fn gauss_examples() {
        assert!((gauss(0.4, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((gauss(GOLD, 1).unwrap() - GOLD).abs() < 1e-14);
        let s = 2f64.sqrt() - 1.0;
        assert!((gauss(s, 1).unwrap() - s).abs() < 1e-14);
        assert!(matches!(gauss(0.25, 1), Err(Error::RationalInput { .. })));
    }

    #[test]
    fn gauss_orbit_of_golden_stays_put() {
        // On the quotient prefix the orbit is exact.
        let mut th = RotationNumber::golden(60);
        for _ in 0..20 {
            th = th.gauss().unwrap();
            assert!((th.value() - GOLD).abs() < 1e-10);
        }
        // In floating point the map expands errors by 1/θ*² per step; the
        // float orbit tracks the exact one within that envelope.
        let mut t = GOLD;
        for k in 1..=20 {
            t = gauss(t, 1).unwrap();
            assert!((t - GOLD).abs() < 1e-16 * (1.0 / (GOLD * GOLD)).powi(k) * 4.0);
        }
    }

    #[test]
    fn denominator_examples() {
        assert_eq!(denominators(&RotationNumber::golden(10), 6).unwrap(), vec![1, 1, 2, 3, 5, 8, 13]);
        assert_eq!(denominators(&RotationNumber::sqrt2m1(10), 4).unwrap(), vec![1, 2, 5, 12, 29]);
        assert!(matches!(denominators(&RotationNumber::golden(3), 4), Err(Error::InsufficientPrefix { .. })));
    }

    #[test]
    fn brjuno_examples() {
        let g = RotationNumber::golden(DEFAULT_PREFIX);
        assert!((brjuno_sum(&g, 0).unwrap() - (1.0 / GOLD).ln()).abs() < 1e-14);
        let closed = (1.0 / GOLD).ln() / (1.0 - GOLD);
        assert!((brjuno_sum(&g, 60).unwrap() - closed).abs() < 1e-10);
        assert!((closed - 1.2598).abs() < 1e-4);
    }

    #[test]
    fn golden_words() {
        let g = RotationNumber::golden(10);
        let (s1, t1) = multi_indices(&g, 1).unwrap();
        assert_eq!(s1.entries(), &[0, 1, 1, 0]);
        assert_eq!(t1.entries(), &[1, 0]);
        let (s2, t2) = multi_indices(&g, 2).unwrap();
        assert_eq!(s2.entries(), &[1, 1, 1, 0]);
        assert_eq!(t2.entries(), &[0, 1, 1, 0]);
        let (h, sel) = hat_index(&s2).unwrap();
        assert_eq!(sel, Selector::EtaXi);
        assert_eq!(h.entries(), &[1, 0, 0, 0]);
        assert_eq!(hat_with(&t2, sel).unwrap().entries(), &[0, 0, 0, 0]);
    }

    #[test]
    fn hat_cases() {
        let (h, sel) = hat_index(&MultiIndex(vec![1, 2, 3, 0])).unwrap();
        assert_eq!((h.entries(), sel), (&[1u64, 2, 1, 0][..], Selector::EtaEta));
        let (h, sel) = hat_index(&MultiIndex(vec![2, 1, 1, 0])).unwrap();
        assert_eq!((h.entries(), sel), (&[2u64, 0, 0, 0][..], Selector::EtaXi));
        assert!(matches!(hat_index(&MultiIndex(vec![1, 2, 1, 1])), Err(Error::MalformedWord(_))));
    }

    #[test]
    fn decimal_parsing() {
        let (r, warn) = RotationNumber::parse("0.6180339887498949", 40).unwrap();
        assert!(warn.is_some());
        assert!(r.len() > 10 && r.quotients()[..10].iter().all(|&a| a == 1));
        let (r, warn) = RotationNumber::parse("1,2,1,1", 40).unwrap();
        assert_eq!((r.quotients(), warn), (&[1u64, 2, 1, 1][..], None));
        assert_eq!(RotationNumber::parse("sqrt2m1", 5).unwrap().0.quotients(), &[2; 5]);
        assert!(RotationNumber::parse("bogus", 5).is_err());
    }

    fn random_bounded(rng: &mut ChaCha8Rng, m: u64, len: usize) -> RotationNumber {
        RotationNumber::new((0..len).map(|_| rng.gen_range(1..=m)).collect(), Some(m)).unwrap()
    }

    #[test]
    fn words_have_lemma_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let th = random_bounded(&mut rng, 5, 12);
            let q = denominators(&th, 8).unwrap();
            let p = numerators(&th, 8).unwrap();
            for n in 2..=8 {
                let (s, t) = multi_indices(&th, n).unwrap();
                assert!(s.is_admissible() && t.is_admissible());
                assert!(s.has_trailing_structure(), "{s}");
                if s.ends_with_one_one_zero() {
                    assert!(t.ends_with_one_one_zero(), "{s} vs {t}");
                }
                let (_, sel) = hat_index(&s).unwrap();
                hat_with(&t, sel).unwrap();
                assert_eq!(s.weight(), (q[n], p[n]));
                assert_eq!(t.weight(), (q[n - 1], p[n - 1]));
            }
        }
    }

    proptest! {
        #[test]
        fn brjuno_partials_increase(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = random_bounded(&mut rng, 5, 60);
            let ys = brjuno_partials(&th, 40).unwrap();
            prop_assert!(ys.windows(2).all(|w| w[1] >= w[0]));
            // geometric convergence: the j-th increment is at most max log(1/θ)·(max θ)^j
            let tmax = (0..41).map(|j| th.theta(j).unwrap()).fold(0.0, f64::max);
            let lmax = (0..41).map(|j| (1.0 / th.theta(j).unwrap()).ln()).fold(0.0, f64::max);
            for (j, w) in ys.windows(2).enumerate() {
                prop_assert!(w[1] - w[0] <= lmax * tmax.powi(j as i32 + 1) + 1e-14);
            }
        }

        #[test]
        fn letters_round_trip(seed in 0u64..1000, n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let th = random_bounded(&mut rng, 4, 10);
            let (s, _) = multi_indices(&th, n).unwrap();
            prop_assert_eq!(MultiIndex::from_letters(&s.letters()), s);
        }
    }
}
