//! Memory sets and the matrices built from them.
//!
//! A memory set holds P binary patterns xi^1, ..., xi^P in {-1, 1}^N, either
//! exactly orthogonal (columns of a Sylvester-Hadamard sign matrix, N a power
//! of two) or orthogonal in expectation (i.i.d. uniform signs). From it we
//! build the memory matrix M = N^{-1/2} [xi^1, ..., xi^P], the input-modulated
//! synaptic matrix W(alpha) = (1/N) sum_mu alpha_mu xi^mu xi^mu^T, the cyclic
//! reasoning permutation A over memory indices, and the feature-space
//! transition matrix Q = M A M^T.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};

/// How pattern orthogonality is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthogonalityMode {
    /// Columns of a Sylvester-Hadamard matrix; xi^mu^T xi^nu = N delta_{mu,nu}
    /// holds as an exact integer identity. Requires N to be a power of two.
    Exact,
    /// I.i.d. uniform +-1 entries drawn reproducibly from the seed;
    /// orthogonality holds in expectation only.
    InExpectation,
}

/// P binary patterns in {-1, 1}^N, stored as the columns of an N x P matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MemorySetDoc", into = "MemorySetDoc")]
pub struct MemorySet {
    n: usize,
    p: usize,
    mode: OrthogonalityMode,
    seed: u64,
    patterns: Array2<f64>,
}

/// JSON document form: {N, P, mode, seed, patterns} with patterns as
/// row-major +-1 integers.
#[derive(Serialize, Deserialize)]
struct MemorySetDoc {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "P")]
    p: usize,
    mode: OrthogonalityMode,
    seed: u64,
    patterns: Vec<i8>,
}

impl From<MemorySet> for MemorySetDoc {
    fn from(mem: MemorySet) -> Self {
        let patterns = mem.patterns.iter().map(|&v| v as i8).collect();
        MemorySetDoc {
            n: mem.n,
            p: mem.p,
            mode: mem.mode,
            seed: mem.seed,
            patterns,
        }
    }
}

impl TryFrom<MemorySetDoc> for MemorySet {
    type Error = Error;

    fn try_from(doc: MemorySetDoc) -> Result<Self> {
        if doc.patterns.len() != doc.n * doc.p {
            return Err(Error::DimensionMismatch {
                what: "patterns",
                expected: doc.n * doc.p,
                got: doc.patterns.len(),
            });
        }
        let flat: Vec<f64> = doc.patterns.iter().map(|&v| v as f64).collect();
        let patterns = Array2::from_shape_vec((doc.n, doc.p), flat).expect("shape checked");
        MemorySet::from_patterns(patterns, doc.mode, doc.seed)
    }
}

impl MemorySet {
    /// Wrap an existing sign matrix, validating every invariant.
    pub fn from_patterns(
        patterns: Array2<f64>,
        mode: OrthogonalityMode,
        seed: u64,
    ) -> Result<Self> {
        let (n, p) = patterns.dim();
        if n == 0 {
            return Err(Error::ZeroDimension { n: "N" });
        }
        if p == 0 {
            return Err(Error::ZeroDimension { n: "P" });
        }
        if p > n {
            return Err(Error::TooManyPatterns { n, p });
        }
        if patterns.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidParameter {
                name: "patterns",
                reason: "entries must be +1 or -1".into(),
            });
        }
        let mem = MemorySet {
            n,
            p,
            mode,
            seed,
            patterns,
        };
        if mode == OrthogonalityMode::Exact {
            if !n.is_power_of_two() {
                return Err(Error::ExactRequiresPowerOfTwo { n });
            }
            // Integer Gram check: xi^mu^T xi^nu = N delta_{mu,nu} exactly.
            for mu in 0..p {
                for nu in 0..p {
                    let dot = mem.integer_gram(mu, nu);
                    let expected = if mu == nu { n as i64 } else { 0 };
                    if dot != expected {
                        return Err(Error::InvalidParameter {
                            name: "patterns",
                            reason: format!(
                                "exact mode requires xi^{mu}^T xi^{nu} = {expected}, got {dot}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(mem)
    }

    /// Exact integer inner product between pattern columns.
    pub fn integer_gram(&self, mu: usize, nu: usize) -> i64 {
        self.patterns
            .column(mu)
            .iter()
            .zip(self.patterns.column(nu).iter())
            .map(|(&a, &b)| (a as i64) * (b as i64))
            .sum()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> OrthogonalityMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The N x P sign matrix with columns xi^1, ..., xi^P.
    pub fn patterns(&self) -> &Array2<f64> {
        &self.patterns
    }

    /// The nu-th pattern (0-based), as a column view.
    pub fn pattern(&self, nu: usize) -> ArrayView1<'_, f64> {
        self.patterns.column(nu)
    }

    /// The memory matrix M = N^{-1/2} [xi^1, ..., xi^P].
    pub fn memory_matrix(&self) -> MemoryMatrix {
        MemoryMatrix::new(self)
    }
}

/// The rescaled pattern matrix M = N^{-1/2} [xi^1, ..., xi^P]; in Exact mode
/// M^T M is the P x P identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryMatrix(Array2<f64>);

impl MemoryMatrix {
    pub fn new(mem: &MemorySet) -> Self {
        let scale = 1.0 / (mem.n() as f64).sqrt();
        MemoryMatrix(mem.patterns() * scale)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }
}

/// Slow reasoning state z with the derived saliency weights alpha = z (.) z.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyWeights {
    z: Array1<f64>,
}

impl SaliencyWeights {
    pub fn new(z: Array1<f64>) -> Self {
        SaliencyWeights { z }
    }

    pub fn z(&self) -> &Array1<f64> {
        &self.z
    }

    /// alpha = z (.) z; every component is nonnegative by construction.
    pub fn alpha(&self) -> Array1<f64> {
        &self.z * &self.z
    }
}

/// P x P cyclic-shift permutation over memory indices: A e^(nu) = e^(nu+1 mod P).
#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningMatrix {
    matrix: Array2<f64>,
}

impl ReasoningMatrix {
    /// The cyclic-shift permutation of any size >= 1. Size 1 is the
    /// degenerate self-loop used by the one-pattern transition matrix.
    pub fn cycle(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::ZeroDimension { n: "P" });
        }
        let mut matrix = Array2::zeros((p, p));
        for nu in 0..p {
            matrix[((nu + 1) % p, nu)] = 1.0;
        }
        Ok(ReasoningMatrix { matrix })
    }

    /// The circulant reasoning matrix; rejects P < 2 since a shorter cycle
    /// cannot encode a retrieval order.
    pub fn circulant(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::CycleTooShort { p });
        }
        Self::cycle(p)
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Index that nu is mapped to: the row of the 1 in column nu.
    pub fn successor(&self, nu: usize) -> usize {
        (nu + 1) % self.size()
    }
}

/// Generate P patterns of dimension N.
///
/// Exact mode takes the first P columns of the Sylvester-Hadamard matrix of
/// order N (the seed is unused; the construction is deterministic).
/// InExpectation mode draws i.i.d. uniform signs reproducibly from the seed.
pub fn generate_memories(
    n: usize,
    p: usize,
    mode: OrthogonalityMode,
    seed: u64,
) -> Result<MemorySet> {
    if n == 0 {
        return Err(Error::ZeroDimension { n: "N" });
    }
    if p == 0 {
        return Err(Error::ZeroDimension { n: "P" });
    }
    if p > n {
        return Err(Error::TooManyPatterns { n, p });
    }
    let patterns = match mode {
        OrthogonalityMode::Exact => {
            if !n.is_power_of_two() {
                return Err(Error::ExactRequiresPowerOfTwo { n });
            }
            let h = sylvester_hadamard(n);
            h.slice(ndarray::s![.., ..p]).to_owned()
        }
        OrthogonalityMode::InExpectation => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Array2::from_shape_fn((n, p), |_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
        }
    };
    MemorySet::from_patterns(patterns, mode, seed)
}

/// Sylvester-Hadamard sign matrix of order n (n a power of two).
fn sylvester_hadamard(n: usize) -> Array2<f64> {
    let mut h = Array2::from_elem((1, 1), 1.0);
    let mut size = 1;
    while size < n {
        let mut next = Array2::zeros((2 * size, 2 * size));
        for i in 0..size {
            for j in 0..size {
                let v = h[(i, j)];
                next[(i, j)] = v;
                next[(i, j + size)] = v;
                next[(i + size, j)] = v;
                next[(i + size, j + size)] = -v;
            }
        }
        h = next;
        size *= 2;
    }
    h
}

/// Input-modulated synaptic matrix W(alpha) = (1/N) sum_mu alpha_mu xi^mu xi^mu^T.
///
/// Accumulated as the explicit sum of outer products; equals
/// M diag(alpha) M^T up to rounding.
pub fn synaptic_matrix(mem: &MemorySet, alpha: &Array1<f64>) -> Result<Array2<f64>> {
    if alpha.len() != mem.p() {
        return Err(Error::DimensionMismatch {
            what: "alpha",
            expected: mem.p(),
            got: alpha.len(),
        });
    }
    let n = mem.n();
    let mut w = Array2::<f64>::zeros((n, n));
    for (mu, &a) in alpha.iter().enumerate() {
        let xi = mem.pattern(mu);
        for i in 0..n {
            let s = a * xi[i];
            for j in 0..n {
                w[(i, j)] += s * xi[j];
            }
        }
    }
    let scale = 1.0 / n as f64;
    w.mapv_inplace(|v| v * scale);
    Ok(w)
}

/// Feature-space transition matrix
/// Q = (1/N) sum_nu xi^{A(nu)} xi^{nu}^T, equal to M A M^T.
///
/// Built as the explicit sum of outer products, with the target index of
/// each term read off the reasoning permutation.
pub fn kleinfeld_matrix(mem: &MemorySet, a: &ReasoningMatrix) -> Result<Array2<f64>> {
    if a.size() != mem.p() {
        return Err(Error::DimensionMismatch {
            what: "reasoning matrix",
            expected: mem.p(),
            got: a.size(),
        });
    }
    let n = mem.n();
    let mut q = Array2::<f64>::zeros((n, n));
    for nu in 0..mem.p() {
        let src = mem.pattern(nu);
        let dst = mem.pattern(a.successor(nu));
        for i in 0..n {
            let d = dst[i];
            for j in 0..n {
                q[(i, j)] += d * src[j];
            }
        }
    }
    let scale = 1.0 / n as f64;
    q.mapv_inplace(|v| v * scale);
    Ok(q)
}

/// Overlaps m_nu = xi^{nu}^T Psi(x) / N between the activated state and each
/// stored pattern; for a saturating activation with range [-1, 1] each
/// component lies in [-1, 1]. Overlaps are reported signed.
pub fn overlap(x: &Array1<f64>, mem: &MemorySet, act: Activation) -> Result<Array1<f64>> {
    if x.len() != mem.n() {
        return Err(Error::DimensionMismatch {
            what: "x",
            expected: mem.n(),
            got: x.len(),
        });
    }
    let psi = act.apply(x);
    Ok(mem.patterns().t().dot(&psi) / mem.n() as f64)
}
