/// Named numerical tolerances shared by every analysis.
///
/// Defaults are tuned for desk-scale problems (flattenings up to a few
/// hundred rows). All values can be overridden by name through [`Tolerances::set`].
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute conjugate-symmetry tolerance for tensor validation.
    pub sym_tol: f64,
    /// Relative tolerance for eigen-decompositions and psd checks.
    pub eig_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: f64,
    /// Relative residual accepted from the simultaneous-diagonalization decomposer.
    pub cp_tol: f64,
    /// Relative residual accepted from the real decompositions.
    pub rd_tol: f64,
    /// Relative residual accepted from the [2,2] normal form.
    pub nf_tol: f64,
    /// Coefficient mismatch accepted in Gram certificates.
    pub gram_tol: f64,
    /// Margin below zero required of a negativity witness.
    pub wit_tol: f64,
    /// Relative residual accepted from positive decompositions.
    pub sep_tol: f64,
    /// KKT residual accepted for a Hermitian eigentuple.
    pub eig_tuple_tol: f64,
    /// Relative gap under which two flattening eigenvalues count as repeated.
    pub eig_gap_tol: f64,
    /// Relative rank-1 residual accepted for a spectral term.
    pub r1_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym_tol: 1e-9,
            eig_tol: 1e-10,
            rank_tol: 1e-8,
            cp_tol: 1e-7,
            rd_tol: 1e-8,
            nf_tol: 1e-8,
            gram_tol: 1e-7,
            wit_tol: 1e-9,
            sep_tol: 1e-7,
            eig_tuple_tol: 1e-8,
            eig_gap_tol: 1e-6,
            r1_tol: 1e-7,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 12] = [
        "symTol",
        "eigTol",
        "rankTol",
        "cpTol",
        "rdTol",
        "nfTol",
        "gramTol",
        "witTol",
        "sepTol",
        "eigTupleTol",
        "eigGapTol",
        "r1Tol",
    ];

    /// Overrides one tolerance by its camel-case name. Returns `false` for
    /// unknown names or non-positive values.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        if !(value.is_finite() && value > 0.0) {
            return false;
        }
        let slot = match name {
            "symTol" => &mut self.sym_tol,
            "eigTol" => &mut self.eig_tol,
            "rankTol" => &mut self.rank_tol,
            "cpTol" => &mut self.cp_tol,
            "rdTol" => &mut self.rd_tol,
            "nfTol" => &mut self.nf_tol,
            "gramTol" => &mut self.gram_tol,
            "witTol" => &mut self.wit_tol,
            "sepTol" => &mut self.sep_tol,
            "eigTupleTol" => &mut self.eig_tuple_tol,
            "eigGapTol" => &mut self.eig_gap_tol,
            "r1Tol" => &mut self.r1_tol,
            _ => return false,
        };
        *slot = value;
        true
    }
}
