//! Random decoding codebook and average-SNR codeword selection.
//!
//! Each codeword is the eigenvector matrix of `G G^H` for a `P x P` matrix
//! `G` of i.i.d. complex Gaussian entries. Codewords are drawn one after the
//! other from the same generator, so a `b`-bit codebook is a prefix of the
//! `b+1`-bit codebook drawn from an identically seeded generator.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    complex_gaussian_matrix, hermitian_eigen, orthonormality_defect, CMatrix, C64,
};
use crate::precoding::{EffectiveChannel, GramInverse};

/// Maximum `||Q^H Q - I||_F` accepted for a decoding matrix.
pub const UNITARY_TOL: f64 = 1e-10;

/// Default cap on the memory a generated codebook may occupy (1 GiB).
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// `P x P` unitary matrix whose column `p` is user `p`'s decoding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingMatrix(CMatrix);

impl DecodingMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(invalid(format!(
                "decoding matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = orthonormality_defect(&matrix);
        if !(defect < UNITARY_TOL) {
            return Err(invalid(format!(
                "decoding matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self(matrix))
    }

    pub fn identity(users: usize) -> Self {
        Self(CMatrix::identity(users, users))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Ordered list of `2^b` decoding matrices shared by the base station and
/// the users.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingCodebook {
    bits: u32,
    users: usize,
    codewords: Vec<DecodingMatrix>,
}

impl DecodingCodebook {
    /// Assembles a codebook from explicit codewords; the count must be a
    /// power of two.
    pub fn from_codewords(codewords: Vec<DecodingMatrix>) -> Result<Self> {
        let n = codewords.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(invalid(format!("codebook size {n} is not a power of two")));
        }
        let users = codewords[0].dim();
        if codewords.iter().any(|q| q.dim() != users) {
            return Err(invalid("codewords have mixed dimensions"));
        }
        Ok(Self {
            bits: n.trailing_zeros(),
            users,
            codewords,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[DecodingMatrix] {
        &self.codewords
    }

    pub fn get(&self, index: usize) -> Option<&DecodingMatrix> {
        self.codewords.get(index)
    }

    /// The first `2^bits` codewords as a codebook of their own.
    pub fn prefix(&self, bits: u32) -> Result<Self> {
        if bits > self.bits {
            return Err(invalid(format!(
                "cannot take a {bits}-bit prefix of a {}-bit codebook",
                self.bits
            )));
        }
        Ok(Self {
            bits,
            users: self.users,
            codewords: self.codewords[..1usize << bits].to_vec(),
        })
    }
}

fn random_codeword<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Result<DecodingMatrix> {
    let g = complex_gaussian_matrix(rng, users, users, 1.0);
    let eig = hermitian_eigen(&(&g * g.adjoint()))?;
    DecodingMatrix::new(eig.vectors)
}

/// Generates `2^bits` random unitary codewords under the default memory
/// budget.
pub fn generate_codebook<R: Rng + ?Sized>(
    users: usize,
    bits: u32,
    rng: &mut R,
) -> Result<DecodingCodebook> {
    generate_codebook_with_budget(users, bits, DEFAULT_MEMORY_BUDGET, rng)
}

pub fn generate_codebook_with_budget<R: Rng + ?Sized>(
    users: usize,
    bits: u32,
    budget_bytes: usize,
    rng: &mut R,
) -> Result<DecodingCodebook> {
    if users == 0 {
        return Err(invalid("codebook needs at least one user"));
    }
    let bytes = 1usize
        .checked_shl(bits)
        .filter(|_| bits < usize::BITS - 1)
        .and_then(|n| n.checked_mul(users * users * std::mem::size_of::<C64>()));
    match bytes {
        Some(b) if b <= budget_bytes => {}
        _ => {
            return Err(Error::ResourceLimit(format!(
                "a {bits}-bit codebook of {users}x{users} matrices exceeds the {budget_bytes}-byte budget"
            )))
        }
    }
    let codewords = (0..1usize << bits)
        .map(|_| random_codeword(users, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecodingCodebook {
        bits,
        users,
        codewords,
    })
}

/// Average SNR `(1/P) sum_p SNR_p` for decoding matrix `q`.
pub fn average_snr(h_e: &EffectiveChannel, q: &DecodingMatrix, n0: f64) -> Result<f64> {
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {n0}")));
    }
    if q.dim() != h_e.num_users() {
        return Err(invalid(
            "decoding matrix does not match the number of users",
        ));
    }
    let gram_inv = GramInverse::new(h_e)?;
    Ok(gram_inv.snr_sum_unit_noise(q) / (n0 * h_e.num_users() as f64))
}

/// Outcome of codeword selection.
#[derive(Debug, Clone, Copy)]
pub struct Selection<'a> {
    pub index: usize,
    pub codeword: &'a DecodingMatrix,
    pub average_snr: f64,
}

/// Average-SNR objective of every codeword, with `N0 = 1`.
///
/// Since `N0` scales every codeword equally, one score vector serves every
/// noise level, and because codebooks nest, every prefix size.
#[derive(Debug, Clone)]
pub struct CodewordScores {
    scores: Vec<f64>,
    users: usize,
}

impl CodewordScores {
    pub fn new(codebook: &DecodingCodebook, gram_inv: &GramInverse) -> Result<Self> {
        if codebook.users() != gram_inv.num_users() {
            return Err(invalid("codebook does not match the number of users"));
        }
        let users = codebook.users();
        let scores = codebook
            .codewords()
            .iter()
            .map(|q| gram_inv.snr_sum_unit_noise(q) / users as f64)
            .collect();
        Ok(Self { scores, users })
    }

    /// Average SNR of each codeword at unit noise power.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Index and unit-noise average SNR of the best codeword among the first
    /// `len`; ties go to the lowest index.
    pub fn best_in_prefix(&self, len: usize) -> (usize, f64) {
        let len = len.min(self.scores.len());
        let mut best = (0, self.scores[0]);
        for (i, &s) in self.scores[..len].iter().enumerate().skip(1) {
            if s > best.1 {
                best = (i, s);
            }
        }
        best
    }
}

/// Picks the codeword maximizing the average SNR over the whole codebook.
pub fn select_codeword<'a>(
    codebook: &'a DecodingCodebook,
    h_e: &EffectiveChannel,
    n0: f64,
) -> Result<Selection<'a>> {
    if !(n0.is_finite() && n0 > 0.0) {
        return Err(invalid(format!("noise power must be positive, got {n0}")));
    }
    let gram_inv = GramInverse::new(h_e)?;
    let scores = CodewordScores::new(codebook, &gram_inv)?;
    let (index, score) = scores.best_in_prefix(codebook.len());
    Ok(Selection {
        index,
        codeword: &codebook.codewords[index],
        average_snr: score / n0,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    users: usize,
    bits: u32,
    /// Row-major `[re, im]` pairs, one list per codeword.
    codewords: Vec<Vec<[f64; 2]>>,
}

const BINARY_MAGIC: &[u8; 4] = b"DCBK";
const BINARY_VERSION: u32 = 1;

fn row_major(q: &DecodingMatrix) -> impl Iterator<Item = C64> + '_ {
    let n = q.dim();
    (0..n).flat_map(move |i| (0..n).map(move |j| q.0[(i, j)]))
}

fn from_row_major(users: usize, entries: &[C64]) -> Result<DecodingMatrix> {
    DecodingMatrix::new(CMatrix::from_row_slice(users, users, entries))
}

fn check_header(users: usize, bits: u32, count: usize) -> Result<()> {
    if users == 0 || bits >= usize::BITS || count != 1usize << bits {
        return Err(invalid(format!(
            "codebook file declares {users} users and {bits} bits but holds {count} codewords"
        )));
    }
    Ok(())
}

impl DecodingCodebook {
    pub fn to_json(&self) -> Result<String> {
        let file = CodebookFile {
            users: self.users,
            bits: self.bits,
            codewords: self
                .codewords
                .iter()
                .map(|q| row_major(q).map(|z| [z.re, z.im]).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodebookFile = serde_json::from_str(text)?;
        check_header(file.users, file.bits, file.codewords.len())?;
        let codewords = file
            .codewords
            .iter()
            .map(|entries| {
                if entries.len() != file.users * file.users {
                    return Err(invalid("codeword has the wrong number of entries"));
                }
                let z: Vec<C64> = entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                from_row_major(file.users, &z)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            bits: file.bits,
            users: file.users,
            codewords,
        })
    }

    /// Binary layout: `b"DCBK"`, then version, users and bits as
    /// little-endian `u32`, then every codeword row-major as little-endian
    /// `f64` `(re, im)` pairs.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&BINARY_VERSION.to_le_bytes())?;
        out.write_all(&(self.users as u32).to_le_bytes())?;
        out.write_all(&self.bits.to_le_bytes())?;
        for q in &self.codewords {
            for z in row_major(q) {
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        if &word != BINARY_MAGIC {
            return Err(invalid("not a binary codebook file"));
        }
        let mut read_u32 = |input: &mut R| -> Result<u32> {
            input.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let version = read_u32(&mut input)?;
        if version != BINARY_VERSION {
            return Err(invalid(format!("unsupported codebook version {version}")));
        }
        let users = read_u32(&mut input)? as usize;
        let bits = read_u32(&mut input)?;
        check_header(users, bits, 1usize.checked_shl(bits).unwrap_or(0))?;
        let mut codewords = Vec::with_capacity(1usize << bits);
        let mut entries = vec![C64::new(0.0, 0.0); users * users];
        let mut buf = [0u8; 8];
        for _ in 0..1usize << bits {
            for z in entries.iter_mut() {
                input.read_exact(&mut buf)?;
                z.re = f64::from_le_bytes(buf);
                input.read_exact(&mut buf)?;
                z.im = f64::from_le_bytes(buf);
            }
            codewords.push(from_row_major(users, &entries)?);
        }
        if input.read(&mut buf)? != 0 {
            return Err(invalid("trailing bytes after codebook"));
        }
        Ok(Self {
            bits,
            users,
            codewords,
        })
    }

    /// Writes JSON when the path ends in `.json`, the binary layout otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        if path.extension().is_some_and(|e| e == "json") {
            fs::write(path, self.to_json()?)?;
        } else {
            let mut buf = Vec::new();
            self.write_binary(&mut buf)?;
            fs::write(path, buf)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&fs::read_to_string(path)?)
        } else {
            Self::read_binary(fs::File::open(path)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoding::per_user_snr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn random_channel(d: usize, p: usize, seed: u64) -> EffectiveChannel {
        EffectiveChannel::new(complex_gaussian_matrix(&mut rng(seed), d, p, 1.0)).unwrap()
    }

    #[test]
    fn codebook_sizes() {
        let cb = generate_codebook(4, 0, &mut rng(1)).unwrap();
        assert_eq!(cb.len(), 1);
        let cb = generate_codebook(4, 6, &mut rng(1)).unwrap();
        assert_eq!(cb.len(), 64);
        assert!(cb
            .codewords()
            .iter()
            .all(|q| orthonormality_defect(q.matrix()) < 1e-10));
    }

    #[test]
    fn single_user_codewords_are_one() {
        let cb = generate_codebook(1, 3, &mut rng(2)).unwrap();
        for q in cb.codewords() {
            assert_eq!(q.matrix()[(0, 0)], C64::new(1.0, 0.0));
        }
    }

    #[test]
    fn codebooks_nest_and_reproduce() {
        let small = generate_codebook(3, 4, &mut rng(5)).unwrap();
        let large = generate_codebook(3, 5, &mut rng(5)).unwrap();
        assert_eq!(large.prefix(4).unwrap(), small);
        assert_eq!(generate_codebook(3, 4, &mut rng(5)).unwrap(), small);
    }

    #[test]
    fn budget_is_enforced() {
        let err = generate_codebook_with_budget(4, 10, 1024, &mut rng(0)).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
        assert!(matches!(
            generate_codebook(4, 80, &mut rng(0)).unwrap_err(),
            Error::ResourceLimit(_)
        ));
    }

    #[test]
    fn singleton_codebook_always_selected() {
        let cb = generate_codebook(4, 0, &mut rng(3)).unwrap();
        for seed in 0..5 {
            let sel = select_codeword(&cb, &random_channel(6, 4, seed), 1.0).unwrap();
            assert_eq!(sel.index, 0);
        }
    }

    #[test]
    fn eigenmatrix_wins_when_present() {
        let h_e = random_channel(6, 4, 7);
        let u = hermitian_eigen(&h_e.gram()).unwrap().vectors;
        let mut words = generate_codebook(4, 5, &mut rng(8))
            .unwrap()
            .codewords()
            .to_vec();
        words[17] = DecodingMatrix::new(u).unwrap();
        let cb = DecodingCodebook::from_codewords(words).unwrap();
        assert_eq!(select_codeword(&cb, &h_e, 0.5).unwrap().index, 17);
    }

    #[test]
    fn selection_dominates_every_codeword() {
        let cb = generate_codebook(4, 6, &mut rng(9)).unwrap();
        for seed in 0..10 {
            let h_e = random_channel(6, 4, 100 + seed);
            let sel = select_codeword(&cb, &h_e, 0.8).unwrap();
            for (i, q) in cb.codewords().iter().enumerate() {
                let s = average_snr(&h_e, q, 0.8).unwrap();
                assert!(sel.average_snr >= s * (1.0 - 1e-12), "codeword {i}");
                if s == sel.average_snr {
                    assert!(i >= sel.index);
                }
            }
        }
    }

    #[test]
    fn average_snr_is_mean_of_per_user() {
        let h_e = random_channel(6, 4, 11);
        let q = generate_codebook(4, 0, &mut rng(12)).unwrap().codewords()[0].clone();
        let mean = (0..4)
            .map(|p| per_user_snr(&h_e, &q, 0.4, p).unwrap())
            .sum::<f64>()
            / 4.0;
        let avg = average_snr(&h_e, &q, 0.4).unwrap();
        assert!((avg - mean).abs() / mean < 1e-10);

        let h1 = random_channel(3, 1, 13);
        let q1 = DecodingMatrix::identity(1);
        assert_eq!(
            average_snr(&h1, &q1, 2.0).unwrap(),
            per_user_snr(&h1, &q1, 2.0, 0).unwrap()
        );
    }

    #[test]
    fn selection_is_noise_invariant() {
        let cb = generate_codebook(4, 6, &mut rng(14)).unwrap();
        let h_e = random_channel(6, 4, 15);
        let a = select_codeword(&cb, &h_e, 1.0).unwrap().index;
        for n0 in [1e-3, 0.1, 3.0, 1e3] {
            assert_eq!(select_codeword(&cb, &h_e, n0).unwrap().index, a);
        }
    }

    #[test]
    fn nested_prefix_scores_are_monotone() {
        let cb = generate_codebook(4, 8, &mut rng(16)).unwrap();
        let h_e = random_channel(6, 4, 17);
        let scores = CodewordScores::new(&cb, &GramInverse::new(&h_e).unwrap()).unwrap();
        let mut last = 0.0;
        for b in 0..=8 {
            let (_, s) = scores.best_in_prefix(1 << b);
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn json_and_binary_round_trip() {
        let cb = generate_codebook(3, 3, &mut rng(18)).unwrap();
        assert_eq!(
            DecodingCodebook::from_json(&cb.to_json().unwrap()).unwrap(),
            cb
        );
        let mut buf = Vec::new();
        cb.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 9 * 16);
        assert_eq!(DecodingCodebook::read_binary(buf.as_slice()).unwrap(), cb);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(DecodingCodebook::from_json(r#"{"users":2,"bits":1,"codewords":[]}"#).is_err());
        assert!(
            DecodingCodebook::from_json(r#"{"users":1,"bits":0,"codewords":[[[2.0,0.0]]]}"#)
                .is_err()
        );
        assert!(DecodingCodebook::read_binary(&b"NOPE"[..]).is_err());
        let cb = generate_codebook(2, 1, &mut rng(19)).unwrap();
        let mut buf = Vec::new();
        cb.write_binary(&mut buf).unwrap();
        buf.push(0);
        assert!(DecodingCodebook::read_binary(buf.as_slice()).is_err());
    }
}
