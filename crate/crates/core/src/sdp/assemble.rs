//! Assembly of the constraint polynomials p₁..p₄ (linear in the kernel
//! block entries) and of the complete semidefinite program.

use std::collections::BTreeMap;
use std::path::Path;

use crate::glrep::Signature;
use crate::poly::Poly;
use crate::zonal::{self, AdmissibleTuple, ZonalBlock};
use crate::{rat_int, MultiPoly, RatMatrix, Rational};

use super::delta::{delta_generators, edge_index};
use super::patterns::union_pair_patterns_level;
use super::sos::add_sos_family;
use super::{
    symmetrize_generators, BlockInfo, BlockKind, Constraint, MatEntry, ProblemSpec, SDPProblem,
    SdpError,
};

/// Linear functional of SDP variables: a constant plus coefficients of
/// individual (block, i, j) entries with i ≤ j; a coefficient means the
/// multiplier of the variable X_ij itself.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinForm {
    constant: Rational,
    coeffs: BTreeMap<(usize, usize, usize), Rational>,
}

impl LinForm {
    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.coeffs.is_empty()
    }

    /// Evaluate against concrete block matrices.
    pub fn eval(&self, x: &[RatMatrix]) -> Rational {
        let mut acc = self.constant.clone();
        for (&(b, i, j), c) in &self.coeffs {
            let mut t = c.clone();
            t *= &x[b][(i, j)];
            acc += t;
        }
        acc
    }
}

/// Polynomial in Gram variables whose coefficients are linear functionals of
/// the SDP variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearPoly {
    pub nvars: usize,
    terms: BTreeMap<Vec<u16>, LinForm>,
}

impl LinearPoly {
    pub fn new(nvars: usize) -> Self {
        LinearPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &LinForm)> {
        self.terms.iter()
    }

    pub fn add_constant(&mut self, mono: Vec<u16>, c: Rational) {
        if c == 0 {
            return;
        }
        let form = self.terms.entry(mono).or_default();
        form.constant += c;
        self.normalize_entry_if_zero();
    }

    pub fn add_var_coeff(
        &mut self,
        mono: Vec<u16>,
        key: (usize, usize, usize),
        c: Rational,
    ) {
        if c == 0 {
            return;
        }
        let form = self.terms.entry(mono).or_default();
        let e = form.coeffs.entry(key).or_insert_with(|| rat_int(0));
        *e += c;
        if *e == 0 {
            form.coeffs.remove(&key);
        }
        self.normalize_entry_if_zero();
    }

    fn normalize_entry_if_zero(&mut self) {
        self.terms.retain(|_, f| !f.is_zero());
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// The concrete polynomial for fixed block matrices.
    pub fn instantiate(&self, x: &[RatMatrix]) -> MultiPoly {
        let vars = super::delta::u_vars(match self.nvars {
            0 => 1,
            1 => 2,
            3 => 3,
            6 => 4,
            k => panic!("unexpected gram variable count {k}"),
        });
        let mut p = Poly::zero(vars);
        for (mono, form) in &self.terms {
            p.add_term(mono.clone(), form.eval(x));
        }
        p
    }

    /// Apply a permutation of the u-variables (exponent remap).
    pub fn permute_vars(&self, perm: &[usize]) -> LinearPoly {
        let mut out = LinearPoly::new(self.nvars);
        for (mono, form) in &self.terms {
            let mut ne = vec![0u16; self.nvars];
            for (i, &e) in mono.iter().enumerate() {
                ne[perm[i]] += e;
            }
            out.terms.insert(ne, form.clone());
        }
        out
    }
}

/// Where a kernel block lives in the SDP and which cached zonal entries
/// populate it.
#[derive(Clone, Debug)]
pub struct KernelLayout {
    pub block: usize,
    pub lam: Signature,
    pub tuples: Vec<AdmissibleTuple>,
    /// index of each tuple inside the cached zonal block
    pub cache_indices: Vec<usize>,
}

/// Substitution of the six Gram variables induced by a union pattern.
#[derive(Clone, Copy, Debug)]
enum Subst {
    One,
    Edge(usize),
    Absent,
}

fn pattern_substitution(q: usize, p1: &[usize], p2: &[usize]) -> [Subst; 6] {
    let mut s = [Subst::Absent; 6];
    if p1.len() == 2 {
        s[0] = Subst::Edge(edge_index(q, p1[0], p1[1]));
    }
    if p2.len() == 2 {
        s[1] = Subst::Edge(edge_index(q, p2[0], p2[1]));
    }
    for (r, &pr) in p1.iter().enumerate() {
        for (c, &qc) in p2.iter().enumerate() {
            let idx = 2 + r * 2 + c;
            s[idx] = if pr == qc {
                Subst::One
            } else {
                Subst::Edge(edge_index(q, pr, qc))
            };
        }
    }
    s
}

/// The constraint polynomials: p_q is A₂K on a q-point configuration, as a
/// polynomial in its C(q,2) Gram variables with coefficients linear in the
/// kernel entries. Level 1 uses subsets of size at most one and produces
/// p₁, p₂ only.
pub fn assemble_constraint_polys(
    spec: &ProblemSpec,
    kernels: &[(KernelLayout, &ZonalBlock)],
) -> Vec<LinearPoly> {
    let t = spec.level as usize;
    let qmax = 2 * t;
    let mut polys: Vec<LinearPoly> = (1..=qmax)
        .map(|q| LinearPoly::new(q * (q - 1) / 2))
        .collect();

    for q in 1..=qmax {
        let lp = &mut polys[q - 1];
        for (p1, p2) in union_pair_patterns_level(q, t) {
            let subst = pattern_substitution(q, &p1, &p2);
            for (layout, block) in kernels {
                for (ri, row) in layout.tuples.iter().enumerate() {
                    if !(row.i as usize == p1.len() || row.i == 0) {
                        continue;
                    }
                    for (ci, col) in layout.tuples.iter().enumerate() {
                        if !(col.i as usize == p2.len() || col.i == 0) {
                            continue;
                        }
                        let poly =
                            block.entry(layout.cache_indices[ri], layout.cache_indices[ci]);
                        for (e, coeff) in poly.terms() {
                            let mut mono = vec![0u16; lp.nvars];
                            let mut ok = true;
                            for (vi, &pw) in e.iter().enumerate() {
                                if pw == 0 {
                                    continue;
                                }
                                match subst[vi] {
                                    Subst::One => {}
                                    Subst::Edge(eidx) => mono[eidx] += pw,
                                    Subst::Absent => {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                            assert!(ok, "entry uses a Gram variable outside the pattern");
                            lp.add_var_coeff(
                                mono,
                                (layout.block, ri.min(ci), ri.max(ci)),
                                coeff.clone(),
                            );
                        }
                    }
                }
            }
        }
    }
    polys
}

#[derive(Clone, Copy, Debug)]
pub struct AssembleOptions {
    /// Replace generator orbits by elementary symmetric combinations.
    pub symmetrize: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { symmetrize: true }
    }
}

/// Load the kernel blocks for a spec from the zonal cache (generating any
/// missing files) and lay them out as SDP blocks. Level 1 keeps only the
/// tuples supported on sets of size at most one; empty blocks are skipped.
pub fn kernel_blocks(
    spec: &ProblemSpec,
    cache_dir: &Path,
) -> Result<Vec<(KernelLayout, ZonalBlock)>, SdpError> {
    let mut out = Vec::new();
    let mut next_block = 0usize;
    for lam in spec.signatures() {
        let block = zonal::load_or_generate(lam, spec.n, spec.d2, cache_dir)?;
        let mut tuples = Vec::new();
        let mut cache_indices = Vec::new();
        for (idx, &tup) in block.tuples.iter().enumerate() {
            if spec.level == 1 && tup.i > 1 {
                continue;
            }
            // the cache may hold a wider j-range than this run's row cap
            if lam.degree() + 2 * tup.j > spec.d2 {
                continue;
            }
            tuples.push(tup);
            cache_indices.push(idx);
        }
        if tuples.is_empty() {
            continue;
        }
        out.push((
            KernelLayout {
                block: next_block,
                lam,
                tuples,
                cache_indices,
            },
            block,
        ));
        next_block += 1;
    }
    Ok(out)
}

/// Assemble the full problem: kernel blocks, the p₁ slack, and one SOS
/// family per constraint polynomial.
pub fn assemble(
    spec: &ProblemSpec,
    cache_dir: &Path,
    opts: AssembleOptions,
) -> Result<SDPProblem, SdpError> {
    spec.validate()?;
    let kernels = kernel_blocks(spec, cache_dir)?;
    let kernel_refs: Vec<(KernelLayout, &ZonalBlock)> = kernels
        .iter()
        .map(|(l, b)| (l.clone(), b))
        .collect();
    let polys = assemble_constraint_polys(spec, &kernel_refs);

    let mut problem = SDPProblem {
        spec: Some(spec.clone()),
        blocks: Vec::new(),
        constraints: Vec::new(),
        objective: Vec::new(),
    };
    for (layout, _) in &kernels {
        problem.blocks.push(BlockInfo {
            name: format!("K({},{})", layout.lam.l1, layout.lam.l2),
            size: layout.tuples.len(),
            kind: BlockKind::Kernel,
        });
    }

    // objective: the ((0,0,0),(0,0,0)) entry of the trivial-signature block
    let k0 = kernels
        .iter()
        .find(|(l, _)| l.lam == Signature::new(0, 0))
        .ok_or_else(|| SdpError::InvalidSpec("missing trivial-signature block".into()))?;
    debug_assert_eq!(k0.0.tuples[0], AdmissibleTuple::new(0, 0, 0));
    problem.objective = vec![MatEntry {
        block: k0.0.block,
        i: 0,
        j: 0,
        value: rat_int(1),
    }];

    // p1 + 1 + slack = 0 with a one-by-one slack block
    {
        let slack_block = problem.blocks.len();
        problem.blocks.push(BlockInfo {
            name: "sos:p1:g0".into(),
            size: 1,
            kind: BlockKind::Sos,
        });
        let p1 = &polys[0];
        let mut entries = Vec::new();
        let mut rhs = rat_int(-1);
        if let Some(form) = p1.terms().next().map(|(_, f)| f.clone()) {
            for (&(b, i, j), c) in form.coeffs() {
                let value = if i == j {
                    c.clone()
                } else {
                    c.clone() / Rational::from(2)
                };
                entries.push(MatEntry {
                    block: b,
                    i,
                    j,
                    value,
                });
            }
            rhs -= form.constant();
        }
        entries.push(MatEntry {
            block: slack_block,
            i: 0,
            j: 0,
            value: rat_int(1),
        });
        problem.constraints.push(Constraint {
            entries,
            rhs,
            slack: Some((slack_block, 0, 0)),
        });
    }

    // SOS families for p2 (and p3, p4 at level 2)
    for q in 2..=(2 * spec.level as usize) {
        let set = delta_generators(q as u8, &spec.cos_theta);
        let mut gens: Vec<MultiPoly> = Vec::new();
        for orbit in &set.orbits {
            if opts.symmetrize {
                gens.extend(symmetrize_generators(orbit));
            } else {
                gens.extend(orbit.iter().cloned());
            }
        }
        gens.retain(|g| g.total_degree() <= spec.delta);
        add_sos_family(
            &mut problem,
            &polys[q - 1],
            &gens,
            spec.delta,
            &format!("sos:p{q}"),
        )?;
    }

    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn temp_cache() -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("kisskit-sdp-test-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    fn level1_spec(n: usize, d: u32) -> ProblemSpec {
        ProblemSpec {
            n,
            cos_theta: rat(1, 2),
            level: 1,
            d1: d,
            d2: d,
            delta: d + d % 2,
        }
    }

    #[test]
    fn spec_validation() {
        assert!(level1_spec(4, 6).validate().is_ok());
        let mut bad = level1_spec(4, 6);
        bad.delta = 5;
        assert!(bad.validate().is_err());
        let mut bad = level1_spec(4, 6);
        bad.d1 = 8;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn trivial_kernel_contribution_to_p1() {
        // a kernel with only the (0,0,0) diagonal entry set contributes
        // three times that entry to p1, once per singleton union pattern
        let cache = temp_cache();
        let spec = level1_spec(4, 2);
        let kernels = kernel_blocks(&spec, &cache).unwrap();
        let refs: Vec<(KernelLayout, &ZonalBlock)> =
            kernels.iter().map(|(l, b)| (l.clone(), b)).collect();
        let polys = assemble_constraint_polys(&spec, &refs);
        let k0 = &kernels[0].0;
        assert_eq!(k0.lam, Signature::new(0, 0));
        let mut x: Vec<RatMatrix> = kernels
            .iter()
            .map(|(l, _)| RatMatrix::zeros(l.tuples.len(), l.tuples.len()))
            .collect();
        x[k0.block][(0, 0)] = rat_int(5);
        let p1 = polys[0].instantiate(&x);
        assert_eq!(p1.constant_term(), rat_int(15));
    }

    #[test]
    fn all_zero_kernel_gives_zero_polys() {
        let cache = temp_cache();
        let spec = level1_spec(4, 2);
        let kernels = kernel_blocks(&spec, &cache).unwrap();
        let refs: Vec<(KernelLayout, &ZonalBlock)> =
            kernels.iter().map(|(l, b)| (l.clone(), b)).collect();
        let polys = assemble_constraint_polys(&spec, &refs);
        let x: Vec<RatMatrix> = kernels
            .iter()
            .map(|(l, _)| RatMatrix::zeros(l.tuples.len(), l.tuples.len()))
            .collect();
        for lp in &polys {
            assert!(lp.instantiate(&x).is_zero());
        }
    }

    #[test]
    fn level1_block_structure() {
        let cache = temp_cache();
        let spec = level1_spec(5, 4);
        let prob = assemble(&spec, &cache, AssembleOptions::default()).unwrap();
        // kernel blocks: (0,0) of size 2, then (k,0) of size 1 for k = 1..4
        assert_eq!(prob.blocks[0].size, 2);
        for k in 1..=4 {
            assert_eq!(prob.blocks[k].size, 1, "block {k}");
            assert_eq!(prob.blocks[k].kind, BlockKind::Kernel);
        }
        // objective points at the (0,0) entry of the first block
        assert_eq!(prob.objective.len(), 1);
        assert_eq!(prob.objective[0].block, 0);
        // constraints: 1 for p1 plus delta+1 coefficient rows for p2
        assert_eq!(prob.num_constraints(), 1 + (spec.delta as usize + 1));
        // every constraint carries a slack entry
        assert!(prob.constraints.iter().all(|c| c.slack.is_some()));
    }

    #[test]
    fn level2_invariance_of_p3_p4() {
        let cache = temp_cache();
        let spec = ProblemSpec {
            n: 4,
            cos_theta: rat(1, 2),
            level: 2,
            d1: 2,
            d2: 2,
            delta: 2,
        };
        let kernels = kernel_blocks(&spec, &cache).unwrap();
        let refs: Vec<(KernelLayout, &ZonalBlock)> =
            kernels.iter().map(|(l, b)| (l.clone(), b)).collect();
        let polys = assemble_constraint_polys(&spec, &refs);

        // p3 invariance under all 6 permutations of three points
        let pairs3 = super::super::delta::pair_list(3);
        for perm in permutations(3) {
            let uperm: Vec<usize> = pairs3
                .iter()
                .map(|&(a, b)| {
                    let (na, nb) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                    pairs3.iter().position(|&x| x == (na, nb)).unwrap()
                })
                .collect();
            assert_eq!(polys[2], polys[2].permute_vars(&uperm), "p3 not invariant");
        }
        // p4 invariance under all 24 permutations of four points
        let pairs4 = super::super::delta::pair_list(4);
        for perm in permutations(4) {
            let uperm: Vec<usize> = pairs4
                .iter()
                .map(|&(a, b)| {
                    let (na, nb) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                    pairs4.iter().position(|&x| x == (na, nb)).unwrap()
                })
                .collect();
            assert_eq!(polys[3], polys[3].permute_vars(&uperm), "p4 not invariant");
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
}
