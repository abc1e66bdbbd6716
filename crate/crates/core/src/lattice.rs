//! Hubbard-chain and XXZ-chain Hamiltonians on qubits.
//!
//! Fermionic modes are mapped with the Jordan-Wigner transformation. Qubits
//! `0..L` hold the spin-up sites and qubits `L..2L` the spin-down sites, so
//! parity strings never leave a spin block. A qubit in `|1>` is an occupied
//! mode and `n = (I - Z) / 2`. Boundaries are open.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::c64;
use crate::pauli::{Pauli, PauliOperator, PauliString, PauliTerm, QubitHamiltonian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn label(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

/// Qubit holding site `site` with spin `spin` on an `sites`-site chain.
pub fn mode_index(site: usize, spin: Spin, sites: usize) -> usize {
    match spin {
        Spin::Up => site,
        Spin::Down => sites + site,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    /// Site count `L`.
    pub sites: usize,
    /// Hopping of the pre-quench Hamiltonian.
    pub tau0: f64,
    /// Hopping of the post-quench Hamiltonian.
    pub tau1: f64,
    /// On-site interaction.
    pub u: f64,
    /// Chemical potential.
    pub mu: f64,
}

impl HubbardParams {
    /// Particle-hole symmetric parameters, `mu = U / 2`.
    pub fn half_filling(sites: usize, tau0: f64, tau1: f64, u: f64) -> Self {
        HubbardParams {
            sites,
            tau0,
            tau1,
            u,
            mu: u / 2.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.sites
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return domain(format!("hubbard chain needs at least 2 sites, got {}", self.sites));
        }
        if 2 * self.sites > crate::pauli::MAX_QUBITS {
            return domain(format!("{} sites exceed the qubit limit", self.sites));
        }
        for (name, v) in [
            ("tau0", self.tau0),
            ("tau1", self.tau1),
            ("U", self.u),
            ("mu", self.mu),
        ] {
            if !v.is_finite() {
                return domain(format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    /// Half filling additionally requires an even site count.
    pub fn validate_half_filling(&self) -> Result<()> {
        self.validate()?;
        if self.sites % 2 != 0 {
            return domain(format!("half filling needs an even site count, got {}", self.sites));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XxzParams {
    /// Spin count `L`.
    pub sites: usize,
    /// `ZZ` coupling.
    pub u: f64,
    /// Longitudinal field.
    pub h: f64,
}

impl XxzParams {
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return domain(format!("xxz chain needs at least 2 spins, got {}", self.sites));
        }
        if self.sites > crate::pauli::MAX_QUBITS {
            return domain(format!("{} spins exceed the qubit limit", self.sites));
        }
        if !self.u.is_finite() || !self.h.is_finite() {
            return domain("xxz couplings must be finite");
        }
        Ok(())
    }
}

fn check_site(site: usize, sites: usize) -> Result<()> {
    if site >= sites {
        return domain(format!("site {site} out of range for {sites} sites"));
    }
    Ok(())
}

/// `c_p^dagger c_q + h.c.` for `p < q`:
/// `1/2 X_p Z..Z X_q + 1/2 Y_p Z..Z Y_q` on the spin block of `spin`.
pub fn jordan_wigner_hopping(p: usize, q: usize, spin: Spin, sites: usize) -> Result<Vec<PauliTerm>> {
    hopping_with_sign(p, q, spin, sites, 1.0)
}

/// Hopping expansion with an adjustable sign on the `YZ..ZY` term; a sign of
/// `-1` is the deliberate mutation exercised by the verification suite.
pub(crate) fn hopping_with_sign(
    p: usize,
    q: usize,
    spin: Spin,
    sites: usize,
    y_sign: f64,
) -> Result<Vec<PauliTerm>> {
    check_site(p, sites)?;
    check_site(q, sites)?;
    if p >= q {
        return domain(format!("hopping needs p < q, got p={p}, q={q}"));
    }
    let n = 2 * sites;
    let (a, b) = (mode_index(p, spin, sites), mode_index(q, spin, sites));
    let string_with = |end: Pauli| {
        let mut ops = vec![(a, end), (b, end)];
        ops.extend((a + 1..b).map(|k| (k, Pauli::Z)));
        PauliString::from_sparse(n, &ops)
    };
    Ok(vec![
        PauliTerm::new(0.5, string_with(Pauli::X)?),
        PauliTerm::new(0.5 * y_sign, string_with(Pauli::Y)?),
    ])
}

/// `n_{j,spin} = 1/2 I - 1/2 Z_j`.
pub fn jordan_wigner_number(j: usize, spin: Spin, sites: usize) -> Result<Vec<PauliTerm>> {
    check_site(j, sites)?;
    let n = 2 * sites;
    let q = mode_index(j, spin, sites);
    Ok(vec![
        PauliTerm::new(0.5, PauliString::identity(n)),
        PauliTerm::new(-0.5, PauliString::from_sparse(n, &[(q, Pauli::Z)])?),
    ])
}

fn ladder(site: usize, spin: Spin, sites: usize, create: bool) -> Result<PauliOperator> {
    check_site(site, sites)?;
    let n = 2 * sites;
    let q = mode_index(site, spin, sites);
    // Single ladder operators carry the full parity string over every lower
    // mode, so up and down operators anticommute; in spin-conserving
    // bilinears the up-block part cancels.
    let parity: Vec<(usize, Pauli)> = (0..q).map(|k| (k, Pauli::Z)).collect();
    let mut with_x = parity.clone();
    with_x.push((q, Pauli::X));
    let mut with_y = parity;
    with_y.push((q, Pauli::Y));
    // sigma^- = (X + iY)/2 lowers |1> to |0>; sigma^+ is its adjoint.
    let y_weight = if create { -0.5 } else { 0.5 };
    PauliOperator::from_terms(
        n,
        vec![
            (c64::new(0.5, 0.0), PauliString::from_sparse(n, &with_x)?),
            (c64::new(0.0, y_weight), PauliString::from_sparse(n, &with_y)?),
        ],
    )
}

/// Jordan-Wigner image of `c_{site,spin}^dagger`.
pub fn creation(site: usize, spin: Spin, sites: usize) -> Result<PauliOperator> {
    ladder(site, spin, sites, true)
}

/// Jordan-Wigner image of `c_{site,spin}`.
pub fn annihilation(site: usize, spin: Spin, sites: usize) -> Result<PauliOperator> {
    ladder(site, spin, sites, false)
}

/// `c_p^dagger c_q` for arbitrary `p, q`, as a product of ladder operators.
pub fn one_body(p: usize, q: usize, spin: Spin, sites: usize) -> Result<PauliOperator> {
    creation(p, spin, sites)?.mul(&annihilation(q, spin, sites)?)
}

fn hopping_terms(sites: usize, tau: f64) -> Result<Vec<PauliTerm>> {
    let mut out = Vec::new();
    for bond in 0..sites - 1 {
        for spin in Spin::BOTH {
            for t in jordan_wigner_hopping(bond, bond + 1, spin, sites)? {
                out.push(PauliTerm::new(-tau * t.coefficient, t.string));
            }
        }
    }
    Ok(out)
}

/// `H0 = -tau0 sum_<ij>,s (c_is^dagger c_js + h.c.)` on `2L` qubits.
pub fn build_hubbard_h0(params: &HubbardParams) -> Result<QubitHamiltonian> {
    params.validate()?;
    QubitHamiltonian::from_terms(
        params.n_qubits(),
        hopping_terms(params.sites, params.tau0)?,
        format!("hubbard-h0 L={} tau0={}", params.sites, params.tau0),
    )
}

/// `H1 = -tau1 hopping + U sum_j n_ju n_jd - mu sum_js n_js`.
///
/// Terms appear in Trotter order: hopping (ascending bond, up then down),
/// then interaction, then chemical potential.
pub fn build_hubbard_h1(params: &HubbardParams) -> Result<QubitHamiltonian> {
    params.validate()?;
    let sites = params.sites;
    let n = params.n_qubits();
    let mut terms = hopping_terms(sites, params.tau1)?;

    let number_op = |j, s| -> Result<PauliOperator> {
        PauliOperator::from_terms(
            n,
            jordan_wigner_number(j, s, sites)?
                .into_iter()
                .map(|t| (c64::new(t.coefficient, 0.0), t.string)),
        )
    };
    for j in 0..sites {
        let prod = number_op(j, Spin::Up)?.mul(&number_op(j, Spin::Down)?)?;
        for (c, s) in prod.terms() {
            terms.push(PauliTerm::new(params.u * c.re, s.clone()));
        }
    }
    for j in 0..sites {
        for spin in Spin::BOTH {
            for t in jordan_wigner_number(j, spin, sites)? {
                terms.push(PauliTerm::new(-params.mu * t.coefficient, t.string));
            }
        }
    }
    QubitHamiltonian::from_terms(
        n,
        terms,
        format!(
            "hubbard-h1 L={} tau1={} U={} mu={}",
            sites, params.tau1, params.u, params.mu
        ),
    )
}

/// `H = -sum_j (X_j X_j+1 + Y_j Y_j+1) + U sum_j Z_j Z_j+1 + h sum_j Z_j`.
pub fn build_xxz(params: &XxzParams) -> Result<QubitHamiltonian> {
    params.validate()?;
    let n = params.sites;
    let pair = |j: usize, p: Pauli| PauliString::from_sparse(n, &[(j, p), (j + 1, p)]);
    let mut terms = Vec::new();
    for j in 0..n - 1 {
        terms.push(PauliTerm::new(-1.0, pair(j, Pauli::X)?));
        terms.push(PauliTerm::new(-1.0, pair(j, Pauli::Y)?));
    }
    for j in 0..n - 1 {
        terms.push(PauliTerm::new(params.u, pair(j, Pauli::Z)?));
    }
    for j in 0..n {
        terms.push(PauliTerm::new(
            params.h,
            PauliString::from_sparse(n, &[(j, Pauli::Z)])?,
        ));
    }
    QubitHamiltonian::from_terms(n, terms, format!("xxz L={} U={} h={}", n, params.u, params.h))
}

/// `sqrt(2^n sum_j c_j^2)`.
pub fn frobenius_norm(h: &QubitHamiltonian) -> f64 {
    h.frobenius_norm()
}

/// `sum_{j} n_{j,spin}` over one spin block, or both blocks when `spin` is `None`.
pub fn number_operator(sites: usize, spin: Option<Spin>) -> Result<PauliOperator> {
    let spins: Vec<Spin> = match spin {
        Some(s) => vec![s],
        None => Spin::BOTH.to_vec(),
    };
    let mut terms = Vec::new();
    for s in spins {
        for j in 0..sites {
            for t in jordan_wigner_number(j, s, sites)? {
                terms.push((c64::new(t.coefficient, 0.0), t.string));
            }
        }
    }
    PauliOperator::from_terms(2 * sites, terms)
}

/// `sum_j Z_j` on an `n`-spin chain.
pub fn magnetization_operator(n: usize) -> Result<PauliOperator> {
    let terms = (0..n)
        .map(|j| Ok((c64::new(1.0, 0.0), PauliString::from_sparse(n, &[(j, Pauli::Z)])?)))
        .collect::<Result<Vec<_>>>()?;
    PauliOperator::from_terms(n, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, CMat};
    use crate::oracle;

    fn strings(terms: &[PauliTerm]) -> Vec<(f64, String)> {
        terms
            .iter()
            .map(|t| (t.coefficient, t.string.to_string()))
            .collect()
    }

    #[test]
    fn adjacent_hopping_has_no_parity_string() {
        let t = jordan_wigner_hopping(0, 1, Spin::Up, 2).unwrap();
        assert_eq!(
            strings(&t),
            vec![(0.5, "XXII".to_string()), (0.5, "YYII".to_string())]
        );
        let t = jordan_wigner_hopping(0, 1, Spin::Down, 2).unwrap();
        assert_eq!(
            strings(&t),
            vec![(0.5, "IIXX".to_string()), (0.5, "IIYY".to_string())]
        );
    }

    #[test]
    fn distant_hopping_carries_z() {
        let t = jordan_wigner_hopping(0, 2, Spin::Up, 3).unwrap();
        assert_eq!(
            strings(&t),
            vec![(0.5, "XZXIII".to_string()), (0.5, "YZYIII".to_string())]
        );
    }

    #[test]
    fn hopping_rejects_bad_sites() {
        assert!(jordan_wigner_hopping(1, 1, Spin::Up, 3).is_err());
        assert!(jordan_wigner_hopping(2, 1, Spin::Up, 3).is_err());
        assert!(jordan_wigner_hopping(0, 3, Spin::Up, 3).is_err());
        assert!(jordan_wigner_number(3, Spin::Down, 3).is_err());
    }

    #[test]
    fn number_is_half_identity_minus_half_z() {
        let t = jordan_wigner_number(0, Spin::Up, 1).unwrap();
        assert_eq!(
            strings(&t),
            vec![(0.5, "II".to_string()), (-0.5, "ZI".to_string())]
        );
    }

    #[test]
    fn hopping_matches_fermion_oracle() {
        for sites in 2..=4 {
            for spin in Spin::BOTH {
                for p in 0..sites {
                    for q in p + 1..sites {
                        let terms = jordan_wigner_hopping(p, q, spin, sites).unwrap();
                        let h = QubitHamiltonian::from_terms(2 * sites, terms, "").unwrap();
                        let a = mode_index(p, spin, sites);
                        let b = mode_index(q, spin, sites);
                        let cp = oracle::fermion_annihilator(a, 2 * sites);
                        let cq = oracle::fermion_annihilator(b, 2 * sites);
                        let hop = &cp.adjoint() * &cq;
                        let expected = &hop + hop.adjoint();
                        assert!(max_abs_diff(&h.to_dense(), &expected) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn one_body_matches_fermion_oracle() {
        let sites = 3;
        for spin in Spin::BOTH {
            for p in 0..sites {
                for q in 0..sites {
                    let op = one_body(p, q, spin, sites).unwrap();
                    let cp = oracle::fermion_annihilator(mode_index(p, spin, sites), 2 * sites);
                    let cq = oracle::fermion_annihilator(mode_index(q, spin, sites), 2 * sites);
                    let expected: CMat = &cp.adjoint() * &cq;
                    assert!(max_abs_diff(&op.to_dense(), &expected) < 1e-12, "{p}{q}");
                }
            }
        }
    }

    #[test]
    fn h0_two_sites() {
        let p = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
        let h0 = build_hubbard_h0(&p).unwrap();
        assert_eq!(h0.len(), 4);
        assert!(h0.terms().iter().all(|t| (t.coefficient + 0.5).abs() < 1e-15));
        let d = h0.to_dense();
        assert!(max_abs_diff(&d, &d.adjoint().to_owned()) < 1e-12);
        let trace: c64 = (0..d.nrows()).map(|i| d[(i, i)]).sum();
        assert!(trace.norm() < 1e-12);
    }

    #[test]
    fn interaction_on_one_site() {
        // Only the U term survives with tau1 = 0 and mu = 0; L=1 is not a valid
        // chain, so check site 0 of L=2 expands to four strings on its qubits.
        let p = HubbardParams {
            sites: 2,
            tau0: 1.0,
            tau1: 0.0,
            u: 4.0,
            mu: 0.0,
        };
        let h1 = build_hubbard_h1(&p).unwrap();
        let site0: Vec<_> = h1
            .terms()
            .iter()
            .filter(|t| t.string.get(1) == Pauli::I && t.string.get(3) == Pauli::I)
            .filter(|t| !t.string.is_identity())
            .map(|t| (t.coefficient, t.string.to_string()))
            .collect();
        assert_eq!(
            site0,
            vec![
                (-1.0, "IIZI".to_string()),
                (-1.0, "ZIII".to_string()),
                (1.0, "ZIZI".to_string())
            ]
        );
        // identity collects U/4 from both sites
        let id = h1.terms().iter().find(|t| t.string.is_identity()).unwrap();
        assert!((id.coefficient - 2.0).abs() < 1e-15);
    }

    #[test]
    fn particle_hole_symmetric_h1_has_no_single_z() {
        let p = HubbardParams::half_filling(6, 1.0, 0.1, 4.0);
        let h1 = build_hubbard_h1(&p).unwrap();
        assert!(h1.terms().iter().all(|t| t.string.weight() != 1));
        // 5 bonds * 2 spins * 2 strings + 6 ZZ + identity
        assert_eq!(h1.len(), 20 + 6 + 1);
        assert_eq!(h1.n_qubits(), 12);
    }

    #[test]
    fn h1_conserves_particle_number() {
        let p = HubbardParams::half_filling(2, 1.0, 0.1, 4.0);
        let h = build_hubbard_h1(&p).unwrap().to_dense();
        let n = number_operator(2, None).unwrap().to_dense();
        let comm = &(&h * &n) - &(&n * &h);
        assert!(comm.norm_l2() < 1e-12);
    }

    #[test]
    fn xxz_two_sites() {
        let h = build_xxz(&XxzParams {
            sites: 2,
            u: 4.0,
            h: 0.1,
        })
        .unwrap();
        assert_eq!(
            strings(h.terms()),
            vec![
                (-1.0, "XX".to_string()),
                (-1.0, "YY".to_string()),
                (4.0, "ZZ".to_string()),
                (0.1, "ZI".to_string()),
                (0.1, "IZ".to_string()),
            ]
        );
    }

    #[test]
    fn xxz_conserves_magnetization() {
        let h = build_xxz(&XxzParams {
            sites: 3,
            u: 4.0,
            h: 0.1,
        })
        .unwrap()
        .to_dense();
        let m = magnetization_operator(3).unwrap().to_dense();
        let comm = &(&h * &m) - &(&m * &h);
        assert!(comm.norm_l2() < 1e-12);
    }

    #[test]
    fn xx_chain_spectrum() {
        let h = build_xxz(&XxzParams {
            sites: 2,
            u: 0.0,
            h: 0.0,
        })
        .unwrap();
        let (vals, _) = crate::linalg::hermitian_eig(&h.to_dense()).unwrap();
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(build_hubbard_h0(&HubbardParams::half_filling(1, 1.0, 0.1, 4.0)).is_err());
        assert!(build_xxz(&XxzParams {
            sites: 1,
            u: 1.0,
            h: 0.0
        })
        .is_err());
        assert!(HubbardParams::half_filling(3, 1.0, 0.1, 4.0)
            .validate_half_filling()
            .is_err());
    }
}
