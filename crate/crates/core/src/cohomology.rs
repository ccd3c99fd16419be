//! First group cohomology of finite-dimensional modules, with the tangent modules
//! `Theta = k[t]/(t^N) d/dt` of actions on truncated power series.

use serde::Serialize;

use crate::action::ConstantAction;
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::group::ConstantGroup;
use crate::linalg::{self, LinearMap, Span};
use crate::ring::{BaseRing, Scalar};

type Matrix = Vec<Vec<Scalar>>;

/// A `k[G]`-module with an explicit basis; `mats[g][i][j]` is the `i`-th coordinate of `g e_j`.
#[derive(Clone, Debug)]
pub struct GModule {
    ring: BaseRing,
    group: ConstantGroup,
    labels: Vec<String>,
    mats: Vec<Matrix>,
}

fn identity(ring: &BaseRing, n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { ring.one() } else { ring.zero() }).collect())
        .collect()
}

fn mat_mul(ring: &BaseRing, a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(ring.zero(), |acc, k| ring.add(&acc, &ring.mul(&row[k], &b[k][j]))))
                .collect()
        })
        .collect()
}

fn mat_vec(ring: &BaseRing, a: &Matrix, v: &[Scalar]) -> Vec<Scalar> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(ring.zero(), |acc, (x, y)| ring.add(&acc, &ring.mul(x, y))))
        .collect()
}

fn columns_to_matrix(ring: &BaseRing, cols: &[Vec<Scalar>], rows: usize) -> Matrix {
    (0..rows)
        .map(|i| cols.iter().map(|c| c.get(i).cloned().unwrap_or_else(|| ring.zero())).collect())
        .collect()
}

impl GModule {
    pub fn new(ring: &BaseRing, group: ConstantGroup, labels: Vec<String>, mats: Vec<Matrix>) -> Result<Self> {
        if !ring.is_field() {
            return Err(Error::Precondition(format!("cohomology needs a field, got {}", ring.spec())));
        }
        let n = labels.len();
        if mats.len() != group.order() || mats.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return Err(Error::Structural("one n x n matrix per group element expected".into()));
        }
        if mats[group.identity()] != identity(ring, n) {
            return Err(Error::InvalidAction("the identity does not act trivially".into()));
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if mat_mul(ring, &mats[g], &mats[h]) != mats[group.mul(g, h)] {
                    return Err(Error::InvalidAction(format!(
                        "matrices violate the relation for ({}, {})",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
        Ok(GModule { ring: ring.clone(), group, labels, mats })
    }

    pub fn trivial(ring: &BaseRing, group: ConstantGroup, dim: usize) -> Result<Self> {
        let mats = vec![identity(ring, dim); group.order()];
        GModule::new(ring, group, (0..dim).map(|i| format!("e{i}")).collect(), mats)
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn group(&self) -> &ConstantGroup {
        &self.group
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self, g: usize) -> &Matrix {
        &self.mats[g]
    }

    pub fn act(&self, g: usize, v: &[Scalar]) -> Vec<Scalar> {
        mat_vec(&self.ring, &self.mats[g], v)
    }

    /// Basis of `M^H` for a set of elements `H`.
    pub fn fixed_basis(&self, elems: &[usize]) -> Result<Vec<Vec<Scalar>>> {
        let n = self.dim();
        let mut rows = Vec::new();
        for &h in elems {
            for i in 0..n {
                rows.push(
                    (0..n)
                        .map(|j| {
                            let d = if i == j { self.ring.one() } else { self.ring.zero() };
                            self.ring.sub(&self.mats[h][i][j], &d)
                        })
                        .collect(),
                );
            }
        }
        if rows.is_empty() {
            return Ok(identity(&self.ring, n));
        }
        linalg::kernel(&self.ring, &rows, n)
    }

    /// The restriction to a subgroup, re-indexed by `subgroup_as_group`.
    pub fn restrict(&self, sub: &[usize]) -> Result<(GModule, Vec<usize>)> {
        let (h, incl) = self.group.subgroup_as_group(sub)?;
        let mats = incl.iter().map(|&g| self.mats[g].clone()).collect();
        Ok((GModule::new(&self.ring, h, self.labels.clone(), mats)?, incl))
    }

    /// `M^H` as a `G/H`-module, with its basis inside `M` and the projection `G -> G/H`.
    pub fn fixed_quotient(&self, normal: &[usize]) -> Result<(GModule, Vec<Vec<Scalar>>, Vec<usize>)> {
        if !self.group.is_normal(normal) {
            return Err(Error::Precondition("the subgroup is not normal".into()));
        }
        let (q, proj) = self.group.quotient(normal)?;
        let basis = self.fixed_basis(normal)?;
        let mut mats = vec![Vec::new(); q.order()];
        for (qi, m) in mats.iter_mut().enumerate() {
            let g = proj.iter().position(|&x| x == qi).expect("projection is onto");
            let cols = basis
                .iter()
                .map(|w| {
                    linalg::solve(&self.ring, &basis, &self.act(g, w))?
                        .ok_or_else(|| Error::InvalidAction("M^H is not stable under G".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            *m = columns_to_matrix(&self.ring, &cols, basis.len());
        }
        let labels = (0..basis.len()).map(|i| format!("w{i}")).collect();
        Ok((GModule::new(&self.ring, q, labels, mats)?, basis, proj))
    }

    /// `d^0 : M -> C^1`, `(d^0 m)(g) = g m - m`.
    pub fn d0(&self) -> Matrix {
        let n = self.dim();
        let mut rows = Vec::new();
        for g in 0..self.group.order() {
            for i in 0..n {
                rows.push(
                    (0..n)
                        .map(|j| {
                            let d = if i == j { self.ring.one() } else { self.ring.zero() };
                            self.ring.sub(&self.mats[g][i][j], &d)
                        })
                        .collect(),
                );
            }
        }
        rows
    }

    /// `d^1 : C^1 -> C^2`, `(d^1 f)(g, h) = g f(h) - f(gh) + f(g)`.
    pub fn d1(&self) -> Matrix {
        let n = self.dim();
        let o = self.group.order();
        let r = &self.ring;
        let mut rows = Vec::with_capacity(o * o * n);
        for g in 0..o {
            for h in 0..o {
                let gh = self.group.mul(g, h);
                for i in 0..n {
                    let mut row = vec![r.zero(); o * n];
                    for j in 0..n {
                        row[h * n + j] = r.add(&row[h * n + j], &self.mats[g][i][j]);
                    }
                    row[gh * n + i] = r.sub(&row[gh * n + i], &r.one());
                    row[g * n + i] = r.add(&row[g * n + i], &r.one());
                    rows.push(row);
                }
            }
        }
        rows
    }

    pub fn differentials_compose_to_zero(&self) -> bool {
        mat_mul(&self.ring, &self.d1(), &self.d0())
            .iter()
            .flatten()
            .all(|s| self.ring.is_zero(s))
    }
}

/// `H^0` or `H^1` with representatives; degree-one representatives are cocycles in `C^1 = M^|G|`.
#[derive(Clone, Debug, Serialize)]
pub struct CohomologyClassSpace {
    pub degree: u32,
    pub dim: usize,
    #[serde(skip)]
    pub representatives: Vec<Vec<Scalar>>,
    #[serde(skip)]
    coboundaries: Vec<Vec<Scalar>>,
    #[serde(skip)]
    ring: BaseRing,
}

impl CohomologyClassSpace {
    /// Coordinates of a cocycle's class in the chosen representatives.
    pub fn coordinates(&self, cocycle: &[Scalar]) -> Result<Vec<Scalar>> {
        let mut cols = self.representatives.clone();
        cols.extend(self.coboundaries.iter().cloned());
        if cols.is_empty() {
            return if cocycle.iter().all(|s| self.ring.is_zero(s)) {
                Ok(Vec::new())
            } else {
                Err(Error::Structural("not a cocycle".into()))
            };
        }
        let x = linalg::solve(&self.ring, &cols, cocycle)?
            .ok_or_else(|| Error::Structural("not a cocycle".into()))?;
        Ok(x[..self.dim].to_vec())
    }

    pub fn is_coboundary(&self, cocycle: &[Scalar]) -> Result<bool> {
        Ok(self.coordinates(cocycle)?.iter().all(|s| self.ring.is_zero(s)))
    }

    fn labels(&self) -> Vec<String> {
        (0..self.dim).map(|i| format!("c{i}")).collect()
    }
}

pub fn h_zero(module: &GModule) -> Result<CohomologyClassSpace> {
    let all: Vec<usize> = (0..module.group.order()).collect();
    let reps = module.fixed_basis(&all)?;
    Ok(CohomologyClassSpace {
        degree: 0,
        dim: reps.len(),
        representatives: reps,
        coboundaries: Vec::new(),
        ring: module.ring.clone(),
    })
}

/// `H^1` from the bar complex: `ker d^1` modulo `im d^0`.
pub fn h_one(module: &GModule) -> Result<CohomologyClassSpace> {
    let r = &module.ring;
    let width = module.group.order() * module.dim();
    let cocycles = linalg::kernel(r, &module.d1(), width)?;
    let d0 = module.d0();
    let images: Vec<Vec<Scalar>> = (0..module.dim()).map(|j| d0.iter().map(|row| row[j].clone()).collect()).collect();
    let coboundaries = linalg::rref(r, &images);
    let mut span = Span::from_vectors(r, width, coboundaries.iter().cloned())?;
    let mut reps = Vec::new();
    for z in cocycles {
        if span.insert(z.clone()) {
            reps.push(z);
        }
    }
    Ok(CohomologyClassSpace { degree: 1, dim: reps.len(), representatives: reps, coboundaries, ring: r.clone() })
}

/// For cyclic `G = <g>`: `dim ker(Nm) - rank(g - 1)`. `None` when `G` is not cyclic.
pub fn cyclic_oracle_h1_dim(module: &GModule) -> Option<usize> {
    let g = generator_of_cyclic(&module.group)?;
    let (nm, gm1) = norm_and_difference(module, g);
    let n = module.dim();
    let ker = linalg::kernel(&module.ring, &nm, n).ok()?.len();
    Some(ker - linalg::rank(&module.ring, &gm1))
}

fn generator_of_cyclic(group: &ConstantGroup) -> Option<usize> {
    (0..group.order()).find(|&g| group.element_order(g) == group.order())
}

fn norm_and_difference(module: &GModule, g: usize) -> (Matrix, Matrix) {
    let r = &module.ring;
    let n = module.dim();
    let mut nm = vec![vec![r.zero(); n]; n];
    let mut x = module.group.identity();
    for _ in 0..module.group.order() {
        for i in 0..n {
            for j in 0..n {
                nm[i][j] = r.add(&nm[i][j], &module.mats[x][i][j]);
            }
        }
        x = module.group.mul(g, x);
    }
    let id = identity(r, n);
    let gm1 = (0..n)
        .map(|i| (0..n).map(|j| r.sub(&module.mats[g][i][j], &id[i][j])).collect())
        .collect();
    (nm, gm1)
}

/// A map on `H^1` together with the check that coboundaries go to coboundaries.
#[derive(Clone, Debug, Serialize)]
pub struct H1Map {
    pub map: LinearMap,
    pub rows: Vec<String>,
    pub well_defined: bool,
}

impl H1Map {
    fn build(ring: &BaseRing, dom: &CohomologyClassSpace, cod: &CohomologyClassSpace, cols: Vec<Vec<Scalar>>, well_defined: bool) -> Result<Self> {
        let map = LinearMap::from_columns(ring, dom.labels(), cod.labels(), &cols)?;
        let rows = map.rows_text();
        Ok(H1Map { map, rows, well_defined })
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.map.ring, &self.map.matrix)
    }
}

/// Pushes a cochain through a transform of its blocks and reads off classes.
fn map_classes(
    dom: &CohomologyClassSpace,
    cod: &CohomologyClassSpace,
    transform: &dyn Fn(&[Scalar]) -> Vec<Scalar>,
) -> Result<(Vec<Vec<Scalar>>, bool)> {
    let cols = dom
        .representatives
        .iter()
        .map(|f| cod.coordinates(&transform(f)))
        .collect::<Result<Vec<_>>>()?;
    let mut ok = true;
    for b in &dom.coboundaries {
        ok &= cod.is_coboundary(&transform(b)).unwrap_or(false);
    }
    Ok((cols, ok))
}

/// `res : H^1(G, M) -> H^1(H, M)`.
pub fn restriction_h1(module: &GModule, sub: &[usize]) -> Result<H1Map> {
    let (mh, incl) = module.restrict(sub)?;
    let dom = h_one(module)?;
    let cod = h_one(&mh)?;
    let n = module.dim();
    let restrict = |f: &[Scalar]| -> Vec<Scalar> { incl.iter().flat_map(|&g| f[g * n..(g + 1) * n].to_vec()).collect() };
    let (cols, ok) = map_classes(&dom, &cod, &restrict)?;
    H1Map::build(&module.ring, &dom, &cod, cols, ok)
}

/// `inf : H^1(G/H, M^H) -> H^1(G, M)`.
pub fn inflation_h1(module: &GModule, normal: &[usize]) -> Result<H1Map> {
    let (mq, basis, proj) = module.fixed_quotient(normal)?;
    let dom = h_one(&mq)?;
    let cod = h_one(module)?;
    let r = &module.ring;
    let w = basis.len();
    let inflate = |f: &[Scalar]| -> Vec<Scalar> {
        proj.iter()
            .flat_map(|&q| {
                let coords = &f[q * w..(q + 1) * w];
                let mut v = vec![r.zero(); module.dim()];
                for (c, b) in coords.iter().zip(&basis) {
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi = r.add(vi, &r.mul(c, bi));
                    }
                }
                v
            })
            .collect()
    };
    let (cols, ok) = map_classes(&dom, &cod, &inflate)?;
    H1Map::build(r, &dom, &cod, cols, ok)
}

/// `res_H o inf_H` on `H^1(G/H, M^H)`; the zero map when exactness holds.
pub fn restriction_after_inflation(module: &GModule, normal: &[usize]) -> Result<H1Map> {
    let inf = inflation_h1(module, normal)?;
    let res = restriction_h1(module, normal)?;
    let map = res.map.compose(&inf.map)?;
    let rows = map.rows_text();
    Ok(H1Map { map, rows, well_defined: inf.well_defined && res.well_defined })
}

// truncated power series over a base ring, as coefficient vectors

fn s_mul(r: &BaseRing, a: &[Scalar], b: &[Scalar], len: usize) -> Vec<Scalar> {
    let mut out = vec![r.zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if r.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = r.add(&out[i + j], &r.mul(x, y));
        }
    }
    out
}

fn s_one(r: &BaseRing, len: usize) -> Vec<Scalar> {
    let mut v = vec![r.zero(); len];
    if len > 0 {
        v[0] = r.one();
    }
    v
}

fn s_deriv(r: &BaseRing, a: &[Scalar]) -> Vec<Scalar> {
    a.iter().enumerate().skip(1).map(|(k, c)| r.mul(&r.from_i64(k as i64), c)).collect()
}

/// `b(a(t))` for `a` without constant term.
fn s_compose(r: &BaseRing, b: &[Scalar], a: &[Scalar], len: usize) -> Vec<Scalar> {
    let mut out = vec![r.zero(); len];
    for c in b.iter().rev() {
        out = s_mul(r, &out, a, len);
        out[0] = r.add(&out[0], c);
    }
    out
}

fn series(e: &Element, len: usize) -> Vec<Scalar> {
    let alg = e.algebra();
    let mut v = vec![alg.base().zero(); len];
    for (i, c) in e.terms() {
        let d = alg.basis()[i].exps[0] as usize;
        if d < len {
            v[d] = c.clone();
        }
    }
    v
}

/// The matrices of `g (t^i d/dt) = a^i b'(a) d/dt` where `a = g(t)`, `b = g^{-1}(t)`.
fn tangent_matrices(r: &BaseRing, subs: &[(Vec<Scalar>, Vec<Scalar>)], n: usize) -> Vec<Matrix> {
    subs.iter()
        .map(|(a, b)| {
            let jac = s_compose(r, &s_deriv(r, b), a, n);
            let mut cols = Vec::with_capacity(n);
            let mut ai = s_one(r, n);
            for _ in 0..n {
                cols.push(s_mul(r, &ai, &jac, n));
                ai = s_mul(r, &ai, a, n);
            }
            columns_to_matrix(r, &cols, n)
        })
        .collect()
}

fn tangent_labels(var: &str, n: usize) -> Vec<String> {
    (0..n)
        .map(|i| match i {
            0 => format!("d/d{var}"),
            1 => format!("{var}*d/d{var}"),
            _ => format!("{var}^{i}*d/d{var}"),
        })
        .collect()
}

fn check_smooth(action: &ConstantAction, n: u32) -> Result<u32> {
    let alg = action.algebra();
    if alg.variables().len() != 1 || alg.copies() != 1 || !alg.relations().is_empty() {
        return Err(Error::Structural("tangent modules need k[t]/(t^M)".into()));
    }
    let m = alg.truncation().ok_or_else(|| Error::Structural("tangent modules need a truncation".into()))?;
    if m < n + 1 {
        return Err(Error::Precondition(format!("Theta mod t^{n} needs the action modulo t^{}, have t^{m}", n + 1)));
    }
    Ok(m)
}

/// `Theta_T / t^n Theta_T` with the adjoint action `g.theta = g o theta o g^{-1}`.
pub fn theta_module(action: &ConstantAction, n: u32) -> Result<GModule> {
    check_smooth(action, n)?;
    let alg = action.algebra();
    let r = alg.base();
    let g = action.group();
    let t = Element::variable_at(alg, 0, 0);
    let len = n as usize + 1;
    let subs: Vec<_> = (0..g.order())
        .map(|x| (series(&action.apply(x, &t), len), series(&action.apply(g.inv(x), &t), len)))
        .collect();
    let mats = tangent_matrices(r, &subs, n as usize);
    GModule::new(r, g.clone(), tangent_labels(alg.var_names()[0].as_str(), n as usize), mats)
}

/// Rewrites a `t`-series known modulo `t^known` as a series in `Y` (monic of valuation `e`),
/// keeping the `out` coefficients it determines.
fn to_y_series(r: &BaseRing, f: &[Scalar], y: &[Scalar], e: usize, known: usize, out: usize) -> Result<Vec<Scalar>> {
    let mut rest: Vec<Scalar> = f[..known.min(f.len())].to_vec();
    let mut coeffs = vec![r.zero(); out];
    let mut yj = s_one(r, rest.len());
    for (j, c) in coeffs.iter_mut().enumerate() {
        let lead = e * j;
        if lead >= rest.len() {
            break;
        }
        if let Some(bad) = (0..lead).find(|&i| !r.is_zero(&rest[i])) {
            return Err(Error::ThetaYUnavailable(format!("t^{bad} term is not a power series in Y")));
        }
        *c = rest[lead].clone();
        for (ri, yi) in rest.iter_mut().zip(&yj) {
            *ri = r.sub(ri, &r.mul(c, yi));
        }
        yj = s_mul(r, &yj, y, rest.len());
    }
    let checked = rest.len().min(e * out);
    if let Some(bad) = rest[..checked].iter().position(|s| !r.is_zero(s)) {
        return Err(Error::ThetaYUnavailable(format!("t^{bad} term is not a power series in Y")));
    }
    Ok(coeffs)
}

/// Classes at precision `small` that lift to precision `big`, as coordinates in the
/// representatives of `small`. `reduce` truncates one cochain value.
fn lifted_classes(
    small: &GModule,
    big: &GModule,
    reduce: &dyn Fn(&[Scalar]) -> Result<Vec<Scalar>>,
) -> Result<(CohomologyClassSpace, Vec<Vec<Scalar>>)> {
    let hs = h_one(small)?;
    let hb = h_one(big)?;
    let nb = big.dim();
    let mut cols = Vec::new();
    for f in &hb.representatives {
        let mut red = Vec::with_capacity(small.group.order() * small.dim());
        for g in 0..big.group.order() {
            red.extend(reduce(&f[g * nb..(g + 1) * nb])?);
        }
        cols.push(hs.coordinates(&red)?);
    }
    let image = if hs.dim == 0 { Vec::new() } else { linalg::rref(&small.ring, &cols) };
    Ok((hs, image))
}

/// `H^1(G, Theta mod t^n)` next to the image of `H^1(G, Theta mod t^(n + margin))`; the latter
/// discards classes that only exist because of the truncation.
#[derive(Clone, Debug, Serialize)]
pub struct StableH1 {
    pub n: u32,
    pub margin: u32,
    pub raw_dim: usize,
    pub lifted_dim: usize,
}

/// Lift margin used when none is given: twice the group order.
pub fn default_margin(order: usize) -> u32 {
    2 * order as u32
}

pub fn theta_h1(action: &ConstantAction, n: u32, margin: u32) -> Result<StableH1> {
    let small = theta_module(action, n)?;
    let big = theta_module(action, n + margin)?;
    let nn = n as usize;
    let (hs, image) = lifted_classes(&small, &big, &|v| Ok(v[..nn].to_vec()))?;
    Ok(StableH1 { n, margin, raw_dim: hs.dim, lifted_dim: image.len() })
}

/// `Theta_T^H` and `Theta_Y` modulo `t^n` as `G/H`-modules, with the restriction map between them.
struct CompositeStage {
    fixed: GModule,
    basis: Vec<Vec<Scalar>>,
    theta_y: GModule,
    iota: Matrix,
    n_y: usize,
    y: Element,
}

fn composite_stage(action: &ConstantAction, normal: &[usize], n: u32) -> Result<CompositeStage> {
    let m = check_smooth(action, n)? as usize;
    let alg = action.algebra();
    let r = alg.base();
    let group = action.group();
    let theta = theta_module(action, n)?;
    let (fixed, basis, proj) = theta.fixed_quotient(normal)?;
    let q = fixed.group().clone();
    let t = Element::variable_at(alg, 0, 0);
    let e = normal.len();
    let nn = n as usize;
    let n_y = nn.div_ceil(e);
    if m < e * (n_y + 1) {
        return Err(Error::Precondition(format!(
            "Theta_Y mod Y^{n_y} needs the action modulo t^{}, have t^{m}",
            e * (n_y + 1)
        )));
    }
    let y = normal.iter().fold(Element::one(alg), |acc, &h| &acc * &action.apply(h, &t));
    let ys = series(&y, m);
    if y.valuation() != Some(e as u32) || !r.is_one(&ys[e]) {
        return Err(Error::ThetaYUnavailable(format!("Nm_H(t) = {y} is not monic of valuation {e}")));
    }
    // G/H on k[Y]: images of Y and of the inverse substitution, as series in Y
    let ylen = n_y + 1;
    let subs = (0..q.order())
        .map(|qi| {
            let g = proj.iter().position(|&x| x == qi).expect("projection is onto");
            let a = to_y_series(r, &series(&action.apply(g, &y), m), &ys, e, e * ylen, ylen)?;
            let b = to_y_series(r, &series(&action.apply(group.inv(g), &y), m), &ys, e, e * ylen, ylen)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let theta_y = GModule::new(r, q, tangent_labels("Y", n_y), tangent_matrices(r, &subs, n_y))?;
    // theta = h d/dt restricts to (h Y') d/dY
    let dy = s_deriv(r, &ys[..nn + 1]);
    let incl_cols = basis
        .iter()
        .map(|h| to_y_series(r, &s_mul(r, h, &dy, nn), &ys, e, nn, n_y))
        .collect::<Result<Vec<_>>>()?;
    let iota = columns_to_matrix(r, &incl_cols, n_y);
    Ok(CompositeStage { fixed, basis, theta_y, iota, n_y, y })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeReport {
    pub n: u32,
    pub n_y: u32,
    pub margin: u32,
    pub y: String,
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub rank: usize,
    pub matrix: Vec<String>,
    /// The same three numbers on the classes lifting to precision `n + margin`.
    pub lifted_domain_dim: usize,
    pub lifted_codomain_dim: usize,
    pub lifted_rank: usize,
    pub equivariant: bool,
    pub well_defined: bool,
    /// Rank and dimensions recomputed through `ker Nm / im(g - 1)` when `G/H` is cyclic.
    pub oracle_agrees: Option<bool>,
}

impl CompositeReport {
    pub fn lifted_dims(&self) -> (usize, usize, usize) {
        (self.lifted_domain_dim, self.lifted_codomain_dim, self.lifted_rank)
    }
}

/// The map `H^1(G/H, Theta_T^H) -> H^1(G/H, Theta_Y)` induced by restricting an
/// `H`-invariant derivation to `k[Y]`, `Y = Nm_H(t)`, with `Theta_T` taken modulo `t^n`.
pub fn induction_differential_composite(action: &ConstantAction, normal: &[usize], n: u32) -> Result<CompositeReport> {
    induction_differential_composite_with_margin(action, normal, n, default_margin(action.group().order()))
}

pub fn induction_differential_composite_with_margin(
    action: &ConstantAction,
    normal: &[usize],
    n: u32,
    margin: u32,
) -> Result<CompositeReport> {
    let st = composite_stage(action, normal, n)?;
    let big = composite_stage(action, normal, n + margin)?;
    let r = action.algebra().base();
    let q = st.fixed.group().clone();
    let equivariant = (0..q.order())
        .all(|qi| mat_mul(r, &st.iota, st.fixed.matrix(qi)) == mat_mul(r, st.theta_y.matrix(qi), &st.iota));

    let w = st.basis.len();
    let push_cochain = |f: &[Scalar]| -> Vec<Scalar> {
        (0..q.order()).flat_map(|qi| mat_vec(r, &st.iota, &f[qi * w..(qi + 1) * w])).collect()
    };
    let dom = h_one(&st.fixed)?;
    let cod = h_one(&st.theta_y)?;
    let (cols, ok) = map_classes(&dom, &cod, &push_cochain)?;
    let map = H1Map::build(r, &dom, &cod, cols.clone(), ok)?;
    let rank = map.rank();

    // classes surviving from precision n + margin
    let nn = n as usize;
    let reduce_fixed = |v: &[Scalar]| -> Result<Vec<Scalar>> {
        let mut full = vec![r.zero(); nn];
        for (c, b) in v.iter().zip(&big.basis) {
            for (fi, bi) in full.iter_mut().zip(b) {
                *fi = r.add(fi, &r.mul(c, bi));
            }
        }
        linalg::solve(r, &st.basis, &full)?.ok_or_else(|| Error::Structural("truncation leaves M^H".into()))
    };
    let (_, dom_lift) = lifted_classes(&st.fixed, &big.fixed, &reduce_fixed)?;
    let n_y = st.n_y;
    let (_, cod_lift) = lifted_classes(&st.theta_y, &big.theta_y, &|v| Ok(v[..n_y].to_vec()))?;
    let image_cols: Vec<Vec<Scalar>> = dom_lift.iter().map(|c| mat_vec(r, &map.map.matrix, c)).collect();
    let lifted_rank = if image_cols.is_empty() { 0 } else { linalg::rank(r, &image_cols) };
    let cod_span = Span::from_vectors(r, cod.dim, cod_lift.iter().cloned())?;
    let lifted_consistent = image_cols.iter().all(|c| cod_span.contains(c));

    let oracle_agrees = generator_of_cyclic(&q).map(|g| {
        let (nm1, _) = norm_and_difference(&st.fixed, g);
        let (_, gm2) = norm_and_difference(&st.theta_y, g);
        let ker1 = linalg::kernel(r, &nm1, w).unwrap_or_default();
        let im2 = linalg::rank(r, &gm2);
        let mut pushed: Vec<Vec<Scalar>> = ker1.iter().map(|v| mat_vec(r, &st.iota, v)).collect();
        pushed.extend((0..n_y).map(|j| gm2.iter().map(|row| row[j].clone()).collect::<Vec<_>>()));
        linalg::rank(r, &pushed) - im2 == rank
            && cyclic_oracle_h1_dim(&st.fixed) == Some(dom.dim)
            && cyclic_oracle_h1_dim(&st.theta_y) == Some(cod.dim)
    });
    Ok(CompositeReport {
        n,
        n_y: n_y as u32,
        margin,
        y: st.y.to_string(),
        domain_dim: dom.dim,
        codomain_dim: cod.dim,
        rank,
        matrix: map.rows,
        lifted_domain_dim: dom_lift.len(),
        lifted_codomain_dim: cod_lift.len(),
        lifted_rank,
        equivariant,
        well_defined: map.well_defined && lifted_consistent,
        oracle_agrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::AlgebraAutomorphism;
    use crate::curves::smooth_algebra;
    use crate::parse::parse_element;

    fn cyclic_action(p: u64, m: u32, order: usize, image: &str) -> ConstantAction {
        let a = smooth_algebra(&BaseRing::prime_field(p).unwrap(), "t", m).unwrap();
        let phi = AlgebraAutomorphism::new(&a, vec![parse_element(&a, image).unwrap()]).unwrap();
        ConstantAction::new(&a, ConstantGroup::cyclic(order).unwrap(), &[1], vec![phi]).unwrap()
    }

    #[test]
    fn trivial_module_char_two() {
        let f2 = BaseRing::prime_field(2).unwrap();
        let m = GModule::trivial(&f2, ConstantGroup::cyclic(2).unwrap(), 1).unwrap();
        assert!(m.differentials_compose_to_zero());
        assert_eq!(h_one(&m).unwrap().dim, 1);
        assert_eq!(cyclic_oracle_h1_dim(&m), Some(1));
        let f3 = BaseRing::prime_field(3).unwrap();
        let m = GModule::trivial(&f3, ConstantGroup::cyclic(2).unwrap(), 2).unwrap();
        assert_eq!(h_one(&m).unwrap().dim, 0);
    }

    #[test]
    fn tame_theta_is_diagonal() {
        let act = cyclic_action(7, 7, 3, "2*t");
        let m = theta_module(&act, 6).unwrap();
        // zeta^(i-1) on t^i d/dt with zeta = 2
        let r = m.ring().clone();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { r.pow(&r.from_i64(2), (i as u64 + 2) % 3) } else { r.zero() };
                assert_eq!(m.matrix(1)[i][j], expect);
            }
        }
        assert_eq!(h_one(&m).unwrap().dim, 0);
    }

    #[test]
    fn wild_involution_bar_matches_oracle() {
        let act = cyclic_action(2, 9, 2, "t + t^2 + t^3 + t^4 + t^5 + t^6 + t^7 + t^8");
        let m = theta_module(&act, 8).unwrap();
        let r = m.ring().clone();
        assert_eq!(mat_mul(&r, m.matrix(1), m.matrix(1)), identity(&r, 8));
        assert!(m.matrix(1)[2][1] != r.zero());
        assert!(m.differentials_compose_to_zero());
        assert_eq!(cyclic_oracle_h1_dim(&m), Some(h_one(&m).unwrap().dim));
    }

    #[test]
    fn restriction_and_inflation_extremes() {
        let act = cyclic_action(2, 9, 2, "t + t^2 + t^3 + t^4 + t^5 + t^6 + t^7 + t^8");
        let m = theta_module(&act, 8).unwrap();
        let d = h_one(&m).unwrap().dim;
        let id = restriction_h1(&m, &[0, 1]).unwrap();
        assert!(id.well_defined && id.rank() == d);
        assert!(restriction_h1(&m, &[0]).unwrap().map.codomain.is_empty());
        let inf = inflation_h1(&m, &[0]).unwrap();
        assert_eq!(inf.rank(), d);
        assert!(inflation_h1(&m, &[0, 1]).unwrap().map.domain.is_empty());
    }

    // order 4 modulo t^40
    const Z4_CHAR_TWO: &str = "t + t^2 + t^11 + t^15 + t^23 + t^31";

    #[test]
    fn z4_over_z2_char_two() {
        let act = cyclic_action(2, 28, 4, Z4_CHAR_TWO);
        let m = theta_module(&act, 8).unwrap();
        let ri = restriction_after_inflation(&m, &[0, 2]).unwrap();
        assert!(ri.well_defined && ri.map.is_zero());
        let c8 = induction_differential_composite(&act, &[0, 2], 8).unwrap();
        let c10 = induction_differential_composite(&act, &[0, 2], 10).unwrap();
        assert!(c8.y.starts_with("t^2 + t^5"));
        for c in [&c8, &c10] {
            assert!(c.equivariant && c.well_defined && c.oracle_agrees == Some(true), "{c:?}");
        }
        // raw dimensions move with the truncation, lifted ones do not
        assert_ne!((c8.domain_dim, c8.codomain_dim), (c10.domain_dim, c10.codomain_dim));
        assert_eq!(c8.lifted_dims(), c10.lifted_dims());
    }

    #[test]
    fn lifted_theta_h1_is_stable() {
        let act = cyclic_action(2, 28, 4, Z4_CHAR_TWO);
        let a = theta_h1(&act, 8, 8).unwrap();
        let b = theta_h1(&act, 10, 8).unwrap();
        assert_eq!(a.lifted_dim, b.lifted_dim);
        assert!(a.lifted_dim <= a.raw_dim);
    }

    #[test]
    fn short_truncation_is_refused() {
        let act = cyclic_action(2, 12, 4, "t + t^2");
        assert!(matches!(induction_differential_composite(&act, &[0, 2], 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn trivial_subgroup_composite_is_identity() {
        let act = cyclic_action(2, 14, 2, "t + t^2 + t^3 + t^4 + t^5 + t^6 + t^7 + t^8 + t^9 + t^10 + t^11 + t^12 + t^13");
        let c = induction_differential_composite(&act, &[0], 8).unwrap();
        assert_eq!(c.domain_dim, c.codomain_dim);
        assert_eq!(c.rank, c.domain_dim);
    }
}
