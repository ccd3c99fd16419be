//! Tensoring actions along base ring maps and comparing invariants on both sides.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::action::Action;
use crate::algebra::{Element, NormalFormAlgebra};
use crate::error::{Error, Result};
use crate::invariants::{self, p_part, SubalgebraSpan};
use crate::linalg::{self, Span};
use crate::parse::parse_ring;
use crate::ring::{prime_power, BaseRing, ExtensionKind, PrimeRing, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BaseChangeKind {
    Identity,
    /// `R -> R'` with `R'` free over `R` (an extension of the prime ring).
    Inclusion,
    /// `R -> R/I` onto the residue field.
    Reduction,
}

#[derive(Clone, Debug)]
pub struct BaseChange {
    source: BaseRing,
    target: BaseRing,
    kind: BaseChangeKind,
}

impl fmt::Display for BaseChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.source.spec(), self.target.spec())
    }
}

impl BaseChange {
    pub fn identity(r: &BaseRing) -> Self {
        BaseChange { source: r.clone(), target: r.clone(), kind: BaseChangeKind::Identity }
    }

    /// Classifies the canonical map between two rings, if there is one we support.
    pub fn new(source: &BaseRing, target: &BaseRing) -> Result<Self> {
        let kind = if source == target {
            BaseChangeKind::Identity
        } else if source.extension().is_none() && source.prime() == target.prime() {
            BaseChangeKind::Inclusion
        } else if target.extension().is_none() && is_reduction(source, target) {
            BaseChangeKind::Reduction
        } else {
            return Err(Error::Structural(format!("no supported base change {} -> {}", source.spec(), target.spec())));
        };
        let bc = BaseChange { source: source.clone(), target: target.clone(), kind };
        bc.verify()?;
        Ok(bc)
    }

    pub fn parse(source: &BaseRing, target: &str) -> Result<Self> {
        BaseChange::new(source, &parse_ring(target)?)
    }

    /// The stock changes applicable to `source`: identity, flat extensions and reduction to the residue field.
    pub fn stock(source: &BaseRing) -> Vec<BaseChange> {
        let mut out = vec![BaseChange::identity(source)];
        let mut push = |t: Result<BaseRing>| {
            if let Ok(bc) = t.and_then(|t| BaseChange::new(source, &t)) {
                out.push(bc);
            }
        };
        if source.extension().is_none() {
            if let PrimeRing::Modular(p) = source.prime() {
                if crate::ring::is_prime(*p) {
                    push(BaseRing::galois_field(*p, 2, "z"));
                }
            }
            push(BaseRing::artinian(source, "eps", 2));
            push(BaseRing::artinian(source, "eps", 3));
        }
        if let Some(k) = source.residue_field() {
            if k != *source {
                push(Ok(k));
            }
        }
        out
    }

    fn verify(&self) -> Result<()> {
        let s = &self.source;
        let mut samples = vec![s.one(), s.from_i64(-1), s.from_i64(2), s.from_i64(3)];
        if let Some(z) = s.generator() {
            samples.push(z.clone());
            samples.push(s.add(&z, &s.one()));
        }
        if !self.target.is_one(&self.apply(&s.one())) {
            return Err(Error::Structural("base change does not preserve 1".into()));
        }
        for a in &samples {
            for b in &samples {
                let lhs = self.apply(&s.mul(a, b));
                let rhs = self.target.mul(&self.apply(a), &self.apply(b));
                if lhs != rhs {
                    return Err(Error::Structural(format!("{self} is not multiplicative")));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &BaseRing {
        &self.source
    }

    pub fn target(&self) -> &BaseRing {
        &self.target
    }

    pub fn kind(&self) -> BaseChangeKind {
        self.kind
    }

    /// Free (hence flat) extensions are flat; a proper quotient is not.
    pub fn is_flat(&self) -> bool {
        self.kind != BaseChangeKind::Reduction
    }

    pub fn apply(&self, a: &Scalar) -> Scalar {
        match self.kind {
            BaseChangeKind::Identity => a.clone(),
            BaseChangeKind::Inclusion => self.target.embed_prime(a.clone()),
            BaseChangeKind::Reduction => {
                let first = self.source.coords(a).into_iter().next().expect("coordinate");
                match (&first, self.target.prime()) {
                    (Scalar::Mod(x), PrimeRing::Modular(p)) => Scalar::Mod(x % p),
                    _ => first,
                }
            }
        }
    }

    /// A set-theoretic section of a reduction.
    pub fn lift(&self, a: &Scalar) -> Scalar {
        match self.kind {
            BaseChangeKind::Reduction => self.source.embed_prime(a.clone()),
            _ => a.clone(),
        }
    }

    /// Generators of the kernel ideal of a reduction.
    pub fn ideal_generators(&self) -> Vec<Scalar> {
        if self.kind != BaseChangeKind::Reduction {
            return Vec::new();
        }
        match self.source.extension() {
            Some(_) => vec![self.source.generator().expect("extension generator")],
            None => match self.target.prime() {
                PrimeRing::Modular(p) => vec![self.source.from_i64(*p as i64)],
                _ => Vec::new(),
            },
        }
    }

    pub fn map_algebra(&self, alg: &Arc<NormalFormAlgebra>) -> Result<Arc<NormalFormAlgebra>> {
        alg.with_base(self.target.clone())
    }

    pub fn map_element(&self, target: &Arc<NormalFormAlgebra>, e: &Element) -> Element {
        e.map_coeffs(target, |s| self.apply(s))
    }
}

fn is_reduction(source: &BaseRing, target: &BaseRing) -> bool {
    let Some(k) = source.residue_field() else { return false };
    if k != *target {
        return false;
    }
    match source.extension() {
        None => true,
        Some(e) => matches!(e.kind, ExtensionKind::Artinian { .. }) && source.prime().is_field(),
    }
}

/// Transports an action along a base change.
pub fn tensor_action(action: &Action, bc: &BaseChange) -> Result<Action> {
    if action.algebra().base() != bc.source() {
        return Err(Error::ParentMismatch);
    }
    let target = bc.map_algebra(action.algebra())?;
    action.map_base(&target, &|s: &Scalar| bc.apply(s))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonMaps {
    pub base_change: String,
    pub flat: bool,
    pub phi_surjective: bool,
    pub phi_injective: bool,
    pub psi_surjective: bool,
    pub psi_injective: bool,
    pub invariants_length: (u32, u32),
    pub kl_length: (u32, u32),
}

impl ComparisonMaps {
    pub fn all_bijective(&self) -> bool {
        self.phi_surjective && self.phi_injective && self.psi_surjective && self.psi_injective
    }
}

/// The image of an `R`-module under base change, and whether the induced map
/// `M (x) R' -> A'` is injective and onto `target`.
struct Transported {
    images: Vec<Vec<Scalar>>,
    injective: bool,
    surjective: bool,
}

fn transport(bc: &BaseChange, module: &[Vec<Scalar>], target: &Span) -> Result<Transported> {
    let dim = target.ambient_dim();
    let images: Vec<Vec<Scalar>> = module.iter().map(|v| v.iter().map(|s| bc.apply(s)).collect()).collect();
    let image_span = Span::from_vectors(bc.target(), dim, images.iter().cloned())?;
    let surjective = image_span.equals(target);
    let k = module.len();
    let injective = if k == 0 {
        true
    } else {
        // ker over R' of the image map must come from syzygies over R
        let cols = |vs: &[Vec<Scalar>]| -> Vec<Vec<Scalar>> { (0..dim).map(|i| vs.iter().map(|v| v[i].clone()).collect()).collect() };
        let syz = linalg::kernel(bc.source(), &cols(module), k)?;
        let mapped = Span::from_vectors(bc.target(), k, syz.iter().map(|v| v.iter().map(|s| bc.apply(s)).collect()))?;
        let ker = linalg::kernel(bc.target(), &cols(&images), k)?;
        ker.iter().all(|v| mapped.contains(v))
    };
    Ok(Transported { images, injective, surjective })
}

fn module_vectors(s: &SubalgebraSpan) -> Vec<Vec<Scalar>> {
    s.module_basis().into_iter().map(|e| e.into_coeffs()).collect()
}

/// `phi: Sigma_R (x) R' -> Sigma_R'` and `psi: A^G (x) R' -> (A (x) R')^G`.
pub fn comparison_maps(action: &Action, bc: &BaseChange) -> Result<ComparisonMaps> {
    let target = tensor_action(action, bc)?;
    let inv = invariants::invariant_subring(action)?;
    let kl = invariants::kl_subalgebra(action)?;
    let inv_t = invariants::invariant_subring(&target)?;
    let kl_t = invariants::kl_subalgebra(&target)?;
    let psi = transport(bc, &module_vectors(&inv), inv_t.span())?;
    let phi = transport(bc, &module_vectors(&kl), kl_t.span())?;
    Ok(ComparisonMaps {
        base_change: bc.to_string(),
        flat: bc.is_flat(),
        phi_surjective: phi.surjective,
        phi_injective: phi.injective,
        psi_surjective: psi.surjective,
        psi_injective: psi.injective,
        invariants_length: (inv.length(), inv_t.length()),
        kl_length: (kl.length(), kl_t.length()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RadicialReport {
    pub p_power: u64,
    pub kernel_elements_tested: usize,
    pub kernel_powers_vanish: bool,
    pub target_invariants_tested: usize,
    pub target_powers_in_image: bool,
}

impl RadicialReport {
    pub fn holds(&self) -> bool {
        self.kernel_powers_vanish && self.target_powers_in_image
    }
}

fn with_pairwise_sums(vs: &[Element]) -> Vec<Element> {
    let mut out = vs.to_vec();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            out.push(&vs[i] + &vs[j]);
        }
    }
    out
}

/// The algebraic shadows of radiciality for `R -> R/I`: `p^r`-th powers of elements
/// killed by `psi` vanish, and `p^r`-th powers of target invariants lie in the image of `psi`.
pub fn radicial_shadow_check(action: &Action, bc: &BaseChange) -> Result<RadicialReport> {
    let source = bc.source();
    let residue_ok = matches!(source.residue_characteristic(), Some(p) if p > 1)
        && match source.prime() {
            PrimeRing::Modular(n) => prime_power(*n).is_some(),
            _ => false,
        };
    if !residue_ok {
        return Err(Error::Precondition(format!("{} is not a p-adic style base", source.spec())));
    }
    if bc.kind() == BaseChangeKind::Inclusion {
        return Err(Error::Precondition("the target must be a quotient of the source".into()));
    }
    let q = p_part(action);
    let alg = action.algebra();
    let target = tensor_action(action, bc)?;
    let talg = target.algebra().clone();
    let inv = invariants::invariant_subring(action)?;
    let basis = inv.module_basis();
    let vecs: Vec<Vec<Scalar>> = basis.iter().map(|e| e.coeffs().to_vec()).collect();
    let inv_t = invariants::invariant_subring(&target)?;
    let t = transport(bc, &vecs, inv_t.span())?;

    // kernel of psi as R'-combinations of the module basis, lifted to A^G
    let k = vecs.len();
    let kernel = if k == 0 {
        Vec::new()
    } else {
        let cols: Vec<Vec<Scalar>> = (0..talg.dim()).map(|i| t.images.iter().map(|v| v[i].clone()).collect()).collect();
        linalg::kernel(bc.target(), &cols, k)?
    };
    let ideal_span = Span::from_vectors(
        source,
        alg.dim(),
        bc.ideal_generators()
            .iter()
            .flat_map(|i| basis.iter().map(move |b| b.scale(i).into_coeffs())),
    )?;
    let lifted: Vec<Element> = kernel
        .iter()
        .map(|c| {
            c.iter()
                .zip(&basis)
                .fold(Element::zero(alg), |acc, (s, b)| &acc + &b.scale(&bc.lift(s)))
        })
        .collect();
    let lifted = with_pairwise_sums(&lifted);
    let kernel_powers_vanish = lifted.iter().all(|x| ideal_span.contains(x.pow(q).coeffs()));

    let image = Span::from_vectors(bc.target(), talg.dim(), t.images.iter().cloned())?;
    let targets = with_pairwise_sums(&inv_t.module_basis());
    let target_powers_in_image = targets.iter().all(|x| image.contains(x.pow(q).coeffs()));
    Ok(RadicialReport {
        p_power: q,
        kernel_elements_tested: lifted.len(),
        kernel_powers_vanish,
        target_invariants_tested: targets.len(),
        target_powers_in_image,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeReport {
    pub residue_field: String,
    pub residue_surjective: bool,
    /// `(base change, psi bijective)` for the stock artinian extensions.
    pub compatibility: Vec<(String, bool)>,
    pub framework_bug: bool,
}

/// `R -> R[eps]/(eps^2)` and `R -> R[eps]/(eps^3)`.
pub fn stock_extensions(source: &BaseRing) -> Vec<BaseChange> {
    [2, 3]
        .iter()
        .filter_map(|&m| BaseRing::artinian(source, "eps", m).ok())
        .filter_map(|t| BaseChange::new(source, &t).ok())
        .collect()
}

/// Surjectivity onto the invariants of the residue fiber, and if it holds, base-change
/// compatibility of `ker alpha` along the stock artinian extensions.
pub fn exchange_criterion(action: &Action) -> Result<ExchangeReport> {
    let base = action.algebra().base();
    let k = base
        .residue_field()
        .ok_or_else(|| Error::Precondition(format!("{} is not local", base.spec())))?;
    let to_residue = BaseChange::new(base, &k)?;
    let residue_surjective = comparison_maps(action, &to_residue)?.psi_surjective;
    let mut compatibility = Vec::new();
    if residue_surjective {
        for bc in stock_extensions(base) {
            let m = comparison_maps(action, &bc)?;
            compatibility.push((bc.to_string(), m.psi_surjective && m.psi_injective));
        }
    }
    let framework_bug = compatibility.iter().any(|(_, ok)| !ok);
    Ok(ExchangeReport { residue_field: k.spec(), residue_surjective, compatibility, framework_bug })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientCommutesReport {
    pub base_change: String,
    pub bijective: bool,
    pub invariants_length: (u32, u32),
}

/// `A^G (x) R' -> (A (x) R')^G` is bijective.
pub fn quotient_commutes(action: &Action, bc: &BaseChange) -> Result<QuotientCommutesReport> {
    let m = comparison_maps(action, bc)?;
    Ok(QuotientCommutesReport {
        base_change: m.base_change.clone(),
        bijective: m.psi_surjective && m.psi_injective,
        invariants_length: m.invariants_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{AlgebraAutomorphism, ConstantAction};
    use crate::curves::smooth_algebra;
    use crate::group::ConstantGroup;
    use crate::parse::parse_element;

    fn mult_action(base: &BaseRing, n: u32, order: usize, img: &str) -> Action {
        let a = smooth_algebra(base, "t", n).unwrap();
        let phi = AlgebraAutomorphism::new(&a, vec![parse_element(&a, img).unwrap()]).unwrap();
        Action::constant(ConstantAction::new(&a, ConstantGroup::cyclic(order).unwrap(), &[1], vec![phi]).unwrap())
            .unwrap()
    }

    #[test]
    fn classify_changes() {
        let f5 = BaseRing::prime_field(5).unwrap();
        assert_eq!(BaseChange::parse(&f5, "F_5[eps]/(eps^2)").unwrap().kind(), BaseChangeKind::Inclusion);
        assert_eq!(BaseChange::parse(&f5, "GF(25)").unwrap().kind(), BaseChangeKind::Inclusion);
        let z9 = BaseRing::residue_ring(9).unwrap();
        let red = BaseChange::parse(&z9, "F_3").unwrap();
        assert_eq!(red.kind(), BaseChangeKind::Reduction);
        assert!(!red.is_flat());
        assert!(BaseChange::parse(&f5, "F_7").is_err());
        assert_eq!(BaseChange::stock(&f5).len(), 4);
    }

    #[test]
    fn flat_change_is_bijective() {
        let f5 = BaseRing::prime_field(5).unwrap();
        let act = mult_action(&f5, 8, 2, "-t");
        for bc in BaseChange::stock(&f5) {
            let m = comparison_maps(&act, &bc).unwrap();
            assert!(m.all_bijective(), "{m:?}");
        }
    }

    #[test]
    fn reduction_mod_p_jumps() {
        let z9 = BaseRing::residue_ring(9).unwrap();
        let act = mult_action(&z9, 6, 3, "4*t");
        let red = BaseChange::parse(&z9, "F_3").unwrap();
        let target = tensor_action(&act, &red).unwrap();
        assert!(target.as_constant().unwrap().kernel().len() == 3);
        let m = comparison_maps(&act, &red).unwrap();
        assert!(m.phi_surjective);
        assert!(!m.psi_surjective);
        let r = radicial_shadow_check(&act, &red).unwrap();
        assert!(r.holds(), "{r:?}");
        let ex = exchange_criterion(&act).unwrap();
        assert!(!ex.residue_surjective && ex.compatibility.is_empty());
    }

    #[test]
    fn field_base_exchange() {
        let f7 = BaseRing::prime_field(7).unwrap();
        let act = mult_action(&f7, 9, 3, "2*t");
        let ex = exchange_criterion(&act).unwrap();
        assert!(ex.residue_surjective && !ex.framework_bug && ex.compatibility.len() == 2);
    }
}
