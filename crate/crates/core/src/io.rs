//! JSON formats for systems, vectors, quotient specifications and virtually
//! free data.
//!
//! System file:
//! `{"alphabet": [...], "involution": [[x, y], ...], "dims": {x: n},
//!   "maps": {"b|a": rows}, "forms": {x: rows}, "exact": {...}}`.
//! Matrix entries are numbers or `[re, im]`; omitted maps are zero. The
//! optional `"exact"` block holds `{"radicand": d, "maps": ..., "forms": ...}`
//! with entries as integers, fraction strings or
//! `{"rational": "p/q", "sqrt": "p/q"}` meaning `rational + sqrt·√d`; when
//! `"maps"` is absent the floating-point system is read off the exact one.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::exact::{ExactSystem, QuadSurd};
use crate::induce::vf::{CyclicFreeProduct, LambdaElement, VfDatum};
use crate::induce::InducedLayout;
use crate::linalg::{CMatrix, C64};
use crate::multrep::{MultVector, SystemWithForms};
use crate::scalar::Dense;
use crate::subgroups::{FiniteGroup, QuotientSpec, SchreierData};
use crate::system::{FormTuple, MatrixSystem};
use crate::words::{Alphabet, Word};

fn perr(ctx: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{ctx}: {msg}"))
}

fn field<'a>(obj: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| perr(ctx, format!("missing field `{key}`")))
}

fn object<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| perr(ctx, "expected an object"))
}

fn array<'a>(v: &'a Value, ctx: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(ctx, "expected an array"))
}

fn string<'a>(v: &'a Value, ctx: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| perr(ctx, "expected a string"))
}

fn uint(v: &Value, ctx: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| perr(ctx, "expected a nonnegative integer"))
}

fn entry(v: &Value, ctx: &str) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(C64::new(n.as_f64().ok_or_else(|| perr(ctx, "bad number"))?, 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let re = p[0].as_f64().ok_or_else(|| perr(ctx, "bad real part"))?;
            let im = p[1].as_f64().ok_or_else(|| perr(ctx, "bad imaginary part"))?;
            Ok(C64::new(re, im))
        }
        _ => Err(perr(ctx, "entries are numbers or [re, im]")),
    }
}

fn entry_json(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn matrix(v: &Value, rows: usize, cols: usize, ctx: &str) -> Result<CMatrix> {
    let rs = array(v, ctx)?;
    if rs.len() != rows {
        return Err(perr(ctx, format!("expected {rows} rows, got {}", rs.len())));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for (i, r) in rs.iter().enumerate() {
        let rctx = format!("{ctx} row {}", i + 1);
        let cs = array(r, &rctx)?;
        if cs.len() != cols {
            return Err(perr(&rctx, format!("expected {cols} entries, got {}", cs.len())));
        }
        for (j, x) in cs.iter().enumerate() {
            m[(i, j)] = entry(x, &rctx)?;
        }
    }
    Ok(m)
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| entry_json(m[(i, j)])).collect())).collect())
}

fn exact_matrix(v: &Value, rows: usize, cols: usize, radicand: i64, ctx: &str) -> Result<Dense<QuadSurd>> {
    let rs = array(v, ctx)?;
    if rs.len() != rows {
        return Err(perr(ctx, format!("expected {rows} rows, got {}", rs.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, r) in rs.iter().enumerate() {
        let rctx = format!("{ctx} row {}", i + 1);
        let cs = array(r, &rctx)?;
        if cs.len() != cols {
            return Err(perr(&rctx, format!("expected {cols} entries, got {}", cs.len())));
        }
        for x in cs {
            data.push(QuadSurd::from_json(x, radicand).map_err(|e| perr(&rctx, e))?);
        }
    }
    Ok(Dense { rows, cols, data })
}

fn exact_matrix_json(m: &Dense<QuadSurd>) -> Value {
    Value::Array((0..m.rows).map(|i| Value::Array((0..m.cols).map(|j| m.get(i, j).to_json()).collect())).collect())
}

pub fn parse_alphabet(v: &Value) -> Result<Alphabet> {
    let names: Vec<String> = array(field(v, "alphabet", "system")?, "alphabet")?
        .iter()
        .map(|x| string(x, "alphabet").map(str::to_string))
        .collect::<Result<_>>()?;
    let pairs: Vec<(String, String)> = array(field(v, "involution", "system")?, "involution")?
        .iter()
        .map(|p| {
            let p = array(p, "involution")?;
            match p.as_slice() {
                [x, y] => Ok((string(x, "involution")?.to_string(), string(y, "involution")?.to_string())),
                _ => Err(perr("involution", "pairs have two names")),
            }
        })
        .collect::<Result<_>>()?;
    Alphabet::from_pairs(names, &pairs)
}

fn alphabet_json(al: &Alphabet) -> (Value, Value) {
    let names = json!(al.names());
    let inv: Vec<Value> = al.pairs().iter().map(|&(x, y)| json!([al.name(x), al.name(y)])).collect();
    (names, Value::Array(inv))
}

fn parse_map_key(al: &Alphabet, key: &str, ctx: &str) -> Result<(usize, usize)> {
    let (b, a) = key.split_once('|').ok_or_else(|| perr(ctx, format!("map key `{key}` is not of the form b|a")))?;
    let b = al.letter(b).ok_or_else(|| perr(ctx, format!("unknown letter `{b}`")))?;
    let a = al.letter(a).ok_or_else(|| perr(ctx, format!("unknown letter `{a}`")))?;
    Ok((b, a))
}

/// Contents of a system file.
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub system: MatrixSystem,
    pub forms: Option<FormTuple>,
    pub exact: Option<ExactSystem>,
}

impl SystemFile {
    /// The system with its forms attached, exact data included.
    pub fn with_forms(&self, forms: FormTuple) -> Result<Arc<SystemWithForms>> {
        let mut s = SystemWithForms::new(self.system.clone(), forms)?;
        if let Some(e) = &self.exact {
            s = s.with_exact(e.clone())?;
        }
        Ok(s.shared())
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr("system", e))?;
    system_from_value(&v)
}

pub fn system_from_value(v: &Value) -> Result<SystemFile> {
    let al = parse_alphabet(v)?;
    let n = al.len();
    let dobj = object(field(v, "dims", "system")?, "dims")?;
    let mut dims = vec![usize::MAX; n];
    for (k, x) in dobj {
        let a = al.letter(k).ok_or_else(|| perr("dims", format!("unknown letter `{k}`")))?;
        dims[a] = uint(x, &format!("dims.{k}"))?;
    }
    if let Some(a) = dims.iter().position(|&d| d == usize::MAX) {
        return Err(perr("dims", format!("missing dimension for `{}`", al.name(a))));
    }
    let exact = match v.get("exact") {
        None => None,
        Some(e) => Some(parse_exact(e, &al, &dims)?),
    };
    let system = match (v.get("maps"), &exact) {
        (Some(m), _) => {
            let mut s = MatrixSystem::zeros(al.clone(), dims.clone());
            for (k, x) in object(m, "maps")? {
                let ctx = format!("maps.{k}");
                let (b, a) = parse_map_key(&al, k, &ctx)?;
                s.set_map(b, a, matrix(x, dims[b], dims[a], &ctx)?).map_err(|e| perr(&ctx, e))?;
            }
            s
        }
        (None, Some(e)) => e.to_float().0,
        (None, None) => return Err(perr("system", "missing field `maps`")),
    };
    let forms = match (v.get("forms"), &exact) {
        (Some(f), _) => {
            let fobj = object(f, "forms")?;
            let mut out = Vec::with_capacity(n);
            for a in al.letters() {
                let ctx = format!("forms.{}", al.name(a));
                let x = fobj.get(al.name(a)).ok_or_else(|| perr(&ctx, "missing form"))?;
                out.push(matrix(x, dims[a], dims[a], &ctx)?);
            }
            if fobj.keys().any(|k| al.letter(k).is_none()) {
                return Err(perr("forms", "unknown letter"));
            }
            Some(FormTuple::new(out))
        }
        (None, Some(e)) => Some(e.to_float().1),
        (None, None) => None,
    };
    Ok(SystemFile { system, forms, exact })
}

fn parse_exact(v: &Value, al: &Alphabet, dims: &[usize]) -> Result<ExactSystem> {
    let d = field(v, "radicand", "exact")?.as_i64().ok_or_else(|| perr("exact.radicand", "expected an integer"))?;
    let n = al.len();
    let mut maps: Vec<Dense<QuadSurd>> = (0..n * n)
        .map(|i| Dense { rows: dims[i / n], cols: dims[i % n], data: vec![QuadSurd::from_int(0); dims[i / n] * dims[i % n]] })
        .collect();
    for (k, x) in object(field(v, "maps", "exact")?, "exact.maps")? {
        let ctx = format!("exact.maps.{k}");
        let (b, a) = parse_map_key(al, k, &ctx)?;
        maps[b * n + a] = exact_matrix(x, dims[b], dims[a], d, &ctx)?;
    }
    let fobj = object(field(v, "forms", "exact")?, "exact.forms")?;
    let forms = al
        .letters()
        .map(|a| {
            let ctx = format!("exact.forms.{}", al.name(a));
            let x = fobj.get(al.name(a)).ok_or_else(|| perr(&ctx, "missing form"))?;
            exact_matrix(x, dims[a], dims[a], d, &ctx)
        })
        .collect::<Result<_>>()?;
    ExactSystem::new(al.clone(), dims.to_vec(), d, maps, forms)
}

pub fn system_to_json(s: &MatrixSystem, forms: Option<&FormTuple>, exact: Option<&ExactSystem>) -> Value {
    let al = s.alphabet();
    let (names, inv) = alphabet_json(al);
    let mut dims = Map::new();
    for a in al.letters() {
        dims.insert(al.name(a).into(), json!(s.dim(a)));
    }
    let mut maps = Map::new();
    for b in al.letters() {
        for a in al.letters() {
            let m = s.map(b, a);
            if m.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                maps.insert(format!("{}|{}", al.name(b), al.name(a)), matrix_json(m));
            }
        }
    }
    let mut out = Map::new();
    out.insert("alphabet".into(), names);
    out.insert("involution".into(), inv);
    out.insert("dims".into(), Value::Object(dims));
    out.insert("maps".into(), Value::Object(maps));
    if let Some(f) = forms {
        let fm: Map<String, Value> = al.letters().map(|a| (al.name(a).to_string(), matrix_json(f.get(a)))).collect();
        out.insert("forms".into(), Value::Object(fm));
    }
    if let Some(e) = exact {
        let n = al.len();
        let mut em = Map::new();
        for b in 0..n {
            for a in 0..n {
                let m = e.map(b, a);
                if !m.is_zero() {
                    em.insert(format!("{}|{}", al.name(b), al.name(a)), exact_matrix_json(m));
                }
            }
        }
        let ef: Map<String, Value> = al.letters().map(|a| (al.name(a).to_string(), exact_matrix_json(e.form(a)))).collect();
        out.insert("exact".into(), json!({"radicand": e.radicand(), "maps": em, "forms": ef}));
    }
    Value::Object(out)
}

/// Vector file: `{"depth": M, "seeds": {"word": [entries]}}`; omitted seeds
/// are zero.
pub fn parse_vector(text: &str, sys: &Arc<SystemWithForms>) -> Result<MultVector> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr("vector", e))?;
    vector_from_value(&v, sys)
}

pub fn vector_from_value(v: &Value, sys: &Arc<SystemWithForms>) -> Result<MultVector> {
    let depth = uint(field(v, "depth", "vector")?, "vector.depth")?;
    let al = sys.alphabet();
    let mut out = MultVector::zero(sys.clone(), depth)?;
    for (k, x) in object(field(v, "seeds", "vector")?, "vector.seeds")? {
        let ctx = format!("seeds.{k}");
        let w = al.parse_reduced(k).map_err(|e| perr(&ctx, e))?;
        let vals: Vec<C64> = array(x, &ctx)?.iter().map(|e| entry(e, &ctx)).collect::<Result<_>>()?;
        out.set(&w, &vals).map_err(|e| perr(&ctx, e))?;
    }
    Ok(out)
}

pub fn vector_to_json(f: &MultVector) -> Value {
    let al = f.alphabet();
    let seeds: Map<String, Value> = f
        .entries()
        .filter(|(_, v)| v.iter().any(|z| *z != C64::new(0.0, 0.0)))
        .map(|(w, v)| (al.format_word(&w), Value::Array(v.iter().map(|&z| entry_json(z)).collect())))
        .collect();
    json!({"depth": f.depth(), "seeds": seeds})
}

/// Quotient specification, optionally wrapped in `{"quotient": ...}`:
/// `{"order-data": [m, ...] | {"cyclic": [...]} | {"table": rows},
///   "images": {letter: element}, "subgroup": [elements]}`. Elements of a
/// cyclic product are integers (single factor) or coordinate lists.
pub fn parse_quotient(text: &str, al: &Alphabet) -> Result<QuotientSpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr("quotient", e))?;
    quotient_from_value(&v, al)
}

pub fn quotient_from_value(v: &Value, al: &Alphabet) -> Result<QuotientSpec> {
    let q = v.get("quotient").unwrap_or(v);
    let od = field(q, "order-data", "quotient")?;
    let group = match od {
        Value::Array(xs) => FiniteGroup::Cyclic(xs.iter().map(|x| uint(x, "order-data")).collect::<Result<_>>()?),
        Value::Object(m) => match (m.get("cyclic"), m.get("table")) {
            (Some(c), None) => FiniteGroup::Cyclic(
                array(c, "order-data.cyclic")?.iter().map(|x| uint(x, "order-data.cyclic")).collect::<Result<_>>()?,
            ),
            (None, Some(t)) => FiniteGroup::Table(
                array(t, "order-data.table")?
                    .iter()
                    .map(|r| array(r, "order-data.table")?.iter().map(|x| uint(x, "order-data.table")).collect())
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(perr("order-data", "expected `cyclic` or `table`")),
        },
        _ => return Err(perr("order-data", "expected a list of orders or an object")),
    };
    group.validate()?;
    let element = |x: &Value, ctx: &str| -> Result<usize> {
        match x {
            Value::Array(cs) => {
                let cs: Vec<usize> = cs.iter().map(|c| uint(c, ctx)).collect::<Result<_>>()?;
                group.from_coords(&cs)
            }
            _ => {
                let g = uint(x, ctx)?;
                match &group {
                    FiniteGroup::Cyclic(o) if o.len() == 1 => group.from_coords(&[g]),
                    FiniteGroup::Table(_) => group.from_coords(&[g]),
                    _ => Err(perr(ctx, "elements of a product are coordinate lists")),
                }
            }
        }
    };
    let iobj = object(field(q, "images", "quotient")?, "images")?;
    let mut images = vec![usize::MAX; al.len()];
    for (k, x) in iobj {
        let a = al.letter(k).ok_or_else(|| perr("images", format!("unknown letter `{k}`")))?;
        images[a] = element(x, &format!("images.{k}"))?;
    }
    // an omitted inverse letter takes the inverse image
    for a in al.letters() {
        if images[a] == usize::MAX && images[al.inverse(a)] != usize::MAX {
            images[a] = group.inv(images[al.inverse(a)]);
        }
    }
    if let Some(a) = images.iter().position(|&g| g == usize::MAX) {
        return Err(perr("images", format!("missing image for `{}`", al.name(a))));
    }
    let subgroup = match q.get("subgroup") {
        None => None,
        Some(s) => Some(array(s, "subgroup")?.iter().map(|x| element(x, "subgroup")).collect::<Result<_>>()?),
    };
    Ok(QuotientSpec { group, images, subgroup })
}

pub fn schreier_to_json(s: &SchreierData) -> Value {
    let al = s.alphabet();
    let g = s.gen_alphabet();
    let generators: Map<String, Value> = g.letters().map(|c| (g.name(c).to_string(), json!(al.format_word(&s.generators()[c])))).collect();
    let p: Map<String, Value> = al
        .letters()
        .map(|a| (al.name(a).to_string(), json!(s.p_words(a).iter().map(|w| al.format_word(w)).collect::<Vec<_>>())))
        .collect();
    json!({
        "index": s.index(),
        "transversal": s.transversal().iter().map(|w| al.format_word(w)).collect::<Vec<_>>(),
        "generators": generators,
        "p": p,
    })
}

pub fn layout_to_json(s: &SchreierData, layout: &InducedLayout, gen_dims: &[usize]) -> Value {
    let al = s.alphabet();
    let g = s.gen_alphabet();
    let blocks: Map<String, Value> = al
        .letters()
        .map(|a| {
            let rows: Vec<Value> = layout
                .pairs(a)
                .iter()
                .enumerate()
                .map(|(k, &(u, c))| {
                    json!({
                        "u": al.format_word(&s.transversal()[u]),
                        "generator": g.name(c),
                        "offset": layout.offset(a, k),
                        "dim": gen_dims[c],
                    })
                })
                .collect();
            (al.name(a).to_string(), Value::Array(rows))
        })
        .collect();
    json!({"dims": layout.dims(), "blocks": blocks})
}

/// Virtually free datum: `{"factors": [2, 3], "generators": ["s", "r"],
/// "transversal": [...], "free_basis": [...], "table": {"t|s": [t′, w]}}`,
/// or `{"builtin": "psl2z"}`. Table words use the letters `a, A, b, B, ...`
/// for the free basis elements and their inverses; a missing table is
/// searched for.
pub fn parse_vf(text: &str) -> Result<VfDatum> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr("datum", e))?;
    vf_from_value(&v)
}

pub fn vf_from_value(v: &Value) -> Result<VfDatum> {
    if let Some(b) = v.get("builtin") {
        return match string(b, "builtin")? {
            "psl2z" => Ok(crate::induce::vf::psl2z()),
            other => Err(perr("builtin", format!("unknown datum `{other}`"))),
        };
    }
    let orders: Vec<usize> = array(field(v, "factors", "datum")?, "factors")?
        .iter()
        .map(|x| uint(x, "factors"))
        .collect::<Result<_>>()?;
    let names: Vec<String> = array(field(v, "generators", "datum")?, "generators")?
        .iter()
        .map(|x| string(x, "generators").map(str::to_string))
        .collect::<Result<_>>()?;
    let group = CyclicFreeProduct::new(orders, names)?;
    let elems = |key: &str| -> Result<Vec<LambdaElement>> {
        array(field(v, key, "datum")?, key)?
            .iter()
            .map(|x| group.parse(string(x, key)?).map_err(|e| perr(key, e)))
            .collect()
    };
    let transversal = elems("transversal")?;
    let basis = elems("free_basis")?;
    let table = match v.get("table") {
        None => None,
        Some(t) => {
            if basis.len() < 2 || basis.len() > 26 {
                return Err(Error::InvalidDatum(format!("free subgroup rank {} is outside 2..=26", basis.len())));
            }
            let free = Alphabet::standard(basis.len());
            let tobj = object(t, "table")?;
            let k = group.generators();
            let mut out: Vec<Option<(usize, Word)>> = vec![None; transversal.len() * k];
            let t_index: BTreeMap<&LambdaElement, usize> = transversal.iter().enumerate().map(|(i, t)| (t, i)).collect();
            for (key, x) in tobj {
                let ctx = format!("table.{key}");
                let (t, s) = key.split_once('|').ok_or_else(|| perr(&ctx, "keys are t|s"))?;
                let t = t_index
                    .get(&group.parse(t).map_err(|e| perr(&ctx, e))?)
                    .copied()
                    .ok_or_else(|| perr(&ctx, "not a transversal element"))?;
                let s = group.names().iter().position(|n| n == s).ok_or_else(|| perr(&ctx, "unknown generator"))?;
                let pair = array(x, &ctx)?;
                let [t2, w] = pair.as_slice() else {
                    return Err(perr(&ctx, "entries are [t′, w]"));
                };
                let t2 = t_index
                    .get(&group.parse(string(t2, &ctx)?).map_err(|e| perr(&ctx, e))?)
                    .copied()
                    .ok_or_else(|| perr(&ctx, "target is not a transversal element"))?;
                let w = free.parse_reduced(string(w, &ctx)?).map_err(|e| perr(&ctx, e))?;
                out[t * k + s] = Some((t2, w));
            }
            Some(out.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| Error::InvalidDatum("factorization table is not total".into()))?)
        }
    };
    VfDatum::new(group, transversal, basis, table)
}

pub fn vf_to_json(d: &VfDatum) -> Value {
    let g = d.group();
    let free = d.free_alphabet();
    let mut table = Map::new();
    for (ti, t) in d.transversal().iter().enumerate() {
        for s in 0..g.generators() {
            let (t2, w) = d.entry(ti, s);
            table.insert(
                format!("{}|{}", g.format(t), g.names()[s]),
                json!([g.format(&d.transversal()[*t2]), free.format_word(w)]),
            );
        }
    }
    json!({
        "factors": g.orders(),
        "generators": g.names(),
        "transversal": d.transversal().iter().map(|t| g.format(t)).collect::<Vec<_>>(),
        "free_basis": d.basis().iter().map(|b| g.format(b)).collect::<Vec<_>>(),
        "table": table,
    })
}
