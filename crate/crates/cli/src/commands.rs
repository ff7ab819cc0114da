use std::path::Path;
use std::sync::Arc;

use boundary_reps::boundary_measure::{herz_check_with, no_harish_chandra_demo, CylinderMeasure};
use boundary_reps::exact::exact_coefficient;
use boundary_reps::induce::vf::{induce_to_vf, psl2z, vf_validate};
use boundary_reps::induce::{boundary_op, induce_system, intertwine, InducedVector, IntertwineOptions};
use boundary_reps::io::{
    layout_to_json, parse_quotient, parse_system, parse_vector, parse_vf, schreier_to_json, system_to_json, SystemFile,
};
use boundary_reps::linalg::{min_eigenvalue, CMatrix, CVector, C64};
use boundary_reps::multrep::{coefficient, unit_forms, Backend, MultVector, SystemWithForms};
use boundary_reps::par::Execution;
use boundary_reps::subgroups::{coset_table_from_quotient, schreier};
use boundary_reps::system::{compatibility_residual, decompose, normalize, validate, MatrixSystem, SearchOptions};
use boundary_reps::words::{Alphabet, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::{csv_writer, num, read, write_json, CliResult, Context, Failure};
use crate::{BackendChoice, Command, Global};

pub fn dispatch(g: &Global, cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Normalize { system } => cmd_normalize(g, system),
        Command::Decompose { system } => cmd_decompose(g, system),
        Command::Coefficients { system, vector, words, words_file, exact } => {
            cmd_coefficients(g, system, vector.as_deref(), words.as_deref(), words_file.as_deref(), *exact)
        }
        Command::Induce { system, quotient, rank, probes } => cmd_induce(g, system, quotient, *rank, *probes),
        Command::VfInduce { datum, system, radius, probes } => cmd_vf_induce(g, datum, system, *radius, *probes),
        Command::Herz { system, vector, radius, refine } => cmd_herz(g, system, vector.as_deref(), *radius, *refine),
        Command::DemoNoHc { system, vector, uniform, rank, word, max_power } => {
            cmd_demo(g, system.as_deref(), vector.as_deref(), *uniform, *rank, word, *max_power)
        }
        Command::Selftest => cmd_selftest(g),
    }
}

fn load_system(path: &Path) -> CliResult<SystemFile> {
    let sf = parse_system(&read(path)?).context(path.display())?;
    if let Some(d) = validate(&sf.system).into_iter().next() {
        return Err(Failure::validation(format!("{}: {d}", path.display())));
    }
    Ok(sf)
}

fn load_with_forms(path: &Path) -> CliResult<Arc<SystemWithForms>> {
    let sf = load_system(path)?;
    let forms = sf
        .forms
        .clone()
        .ok_or_else(|| Failure::validation(format!("{}: no forms; run `bdrep normalize` first", path.display())))?;
    sf.with_forms(forms).context(path.display())
}

fn load_vector(path: Option<&Path>, sys: &Arc<SystemWithForms>, seed: u64) -> CliResult<MultVector> {
    match path {
        Some(p) => parse_vector(&read(p)?, sys).context(p.display()),
        None => Ok(MultVector::random(sys.clone(), 1, &mut ChaCha8Rng::seed_from_u64(seed))?),
    }
}

fn random_word(al: &Alphabet, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let mut w = Word::identity();
    while w.len() < len {
        let l = rng.random_range(0..al.len());
        if w.last().map(|p| al.inverse(p)) != Some(l) {
            w.push(l);
        }
    }
    w
}

fn cmd_normalize(g: &Global, path: &Path) -> CliResult<()> {
    let sf = load_system(path)?;
    let n = normalize(&sf.system)?;
    let forms = unit_forms(&n.forms);
    eprintln!("spectral radius {}", num(n.spectral_radius));
    eprintln!("residual {}", num(n.residual));
    eprintln!("iterations {}", n.iterations);
    if n.peripheral.computed && (n.peripheral.degenerate || n.peripheral.periodic) {
        eprintln!("warning: the peripheral spectrum has {} eigenvalues of maximal modulus", n.peripheral.eigenvalues.len());
    }
    write_json(g.output.as_deref(), &system_to_json(&n.system, Some(&forms), None))
}

fn cmd_decompose(g: &Global, path: &Path) -> CliResult<()> {
    let sys = load_with_forms(path)?;
    let dec = decompose(sys.system(), sys.forms(), &SearchOptions { seed: g.seed, ..Default::default() })?;
    let al = sys.alphabet();
    eprintln!("{} irreducible components", dec.components.len());
    for (i, c) in dec.components.iter().enumerate() {
        eprintln!("component {}: dims {:?}", i + 1, c.system.dims());
    }
    eprintln!("null dims {:?}, orthogonal split {}", dec.null_dims, dec.orthogonal_split);
    let components: Vec<_> = dec.components.iter().map(|c| system_to_json(&c.system, Some(&c.forms), None)).collect();
    let null_dims: serde_json::Map<String, serde_json::Value> =
        al.letters().map(|a| (al.name(a).to_string(), json!(dec.null_dims[a]))).collect();
    write_json(
        g.output.as_deref(),
        &json!({"components": components, "null_dims": null_dims, "orthogonal_split": dec.orthogonal_split}),
    )
}

fn word_list(al: &Alphabet, words: Option<&str>, file: Option<&Path>) -> CliResult<Vec<(String, Word)>> {
    let raw: Vec<String> = match (words, file) {
        (Some(w), _) => w.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        (None, Some(p)) => read(p)?.lines().map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        (None, None) => Vec::new(),
    };
    raw.into_iter()
        .map(|s| {
            let w = al.parse_reduced(&s).context(format!("word `{s}`"))?;
            Ok((s, w))
        })
        .collect()
}

fn cmd_coefficients(
    g: &Global,
    path: &Path,
    vector: Option<&Path>,
    words: Option<&str>,
    words_file: Option<&Path>,
    exact: bool,
) -> CliResult<()> {
    let sys = load_with_forms(path)?;
    let f = load_vector(vector, &sys, g.seed)?;
    let list = word_list(sys.alphabet(), words, words_file)?;
    if exact && sys.exact().is_none() {
        return Err(Failure::validation(format!("{}: no exact data for --exact", path.display())));
    }
    let backend = match g.backend {
        BackendChoice::Brute => "brute",
        BackendChoice::Fast => "fast",
        BackendChoice::Both => "both",
    };
    let mut w = csv_writer(
        g.output.as_deref(),
        &[("command", "coefficients".into()), ("seed", g.seed.to_string()), ("backend", backend.into())],
    )?;
    let mut header: Vec<&str> = match g.backend {
        BackendChoice::Both => vec!["word", "brute_re", "brute_im", "fast_re", "fast_im", "discrepancy"],
        _ => vec!["word", "re", "im"],
    };
    if exact {
        header.push("exact");
    }
    w.write_record(&header)?;
    let mut worst = 0.0f64;
    for (s, x) in &list {
        let eval = |b: Backend| coefficient(x, &f, &f, b).context(format!("word `{s}`"));
        let mut row = vec![s.clone()];
        match g.backend {
            BackendChoice::Both => {
                let b = eval(Backend::Brute)?;
                let a = eval(Backend::Fast)?;
                let d = (a - b).norm();
                worst = worst.max(d);
                row.extend([num(b.re), num(b.im), num(a.re), num(a.im), num(d)]);
            }
            other => {
                let c = eval(other.primary())?;
                row.extend([num(c.re), num(c.im)]);
            }
        }
        if exact {
            let e = exact_coefficient(x, &f, &f, Execution::default()).context(format!("word `{s}`"))?;
            row.push(e.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    if worst > g.tolerance * f.norm_sq().max(1.0) {
        return Err(Failure::math(format!("backend discrepancy {worst:e} exceeds the tolerance")));
    }
    Ok(())
}

fn cmd_induce(g: &Global, path: &Path, quotient: &Path, rank: usize, probes: usize) -> CliResult<()> {
    let sys0 = load_with_forms(path)?;
    if rank == 0 || rank > 13 {
        return Err(Failure::validation(format!("--rank must lie in 1..=13, got {rank}")));
    }
    let al = Alphabet::standard(rank);
    let spec = parse_quotient(&read(quotient)?, &al).context(quotient.display())?;
    let table = coset_table_from_quotient(&al, &spec).context(quotient.display())?;
    let s = schreier(&table).context(quotient.display())?;
    let ind = induce_system(&sys0, &s)?;
    let target = ind.with_forms()?;
    let residual = compatibility_residual(&ind.system, &ind.forms)?;
    eprintln!("index {}, subgroup rank {}", s.index(), s.rank());
    eprintln!("induced dims {:?}", ind.system.dims());
    eprintln!("compatibility residual {}", num(residual));

    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let opts = IntertwineOptions::default();
    let (mut iso, mut tw, mut cov) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..probes {
        let f = InducedVector::random(&s, &sys0, 1, &mut rng)?;
        let scale = f.norm().max(1.0);
        let j = intertwine(&s, &ind.layout, &target, &f, &opts)?;
        iso = iso.max((j.norm_sq() - f.inner(&f)?.re).abs() / (scale * scale));
        let len = rng.random_range(0..=3);
        let x = random_word(&al, len, &mut rng);
        let lhs = intertwine(&s, &ind.layout, &target, &f.act(&s, &x)?, &opts)?;
        tw = tw.max(lhs.sub(&j.act(&x)?)?.norm() / scale);
        let len = rng.random_range(1..=2);
        let y = random_word(&al, len, &mut rng);
        let lhs = intertwine(&s, &ind.layout, &target, &boundary_op(&s, &f, &y)?, &opts)?;
        cov = cov.max(lhs.sub(&j.cylinder_op(&y)?)?.norm() / scale);
    }
    eprintln!("J isometry defect {}", num(iso));
    eprintln!("J intertwining defect {}", num(tw));
    eprintln!("J boundary covariance defect {}", num(cov));

    let mut out = system_to_json(&ind.system, Some(&ind.forms), None);
    out["layout"] = layout_to_json(&s, &ind.layout, sys0.system().dims());
    out["subgroup"] = schreier_to_json(&s);
    out["report"] = json!({
        "seed": g.seed,
        "probes": probes,
        "residual": residual,
        "isometry": iso,
        "intertwining": tw,
        "boundary_covariance": cov,
    });
    write_json(g.output.as_deref(), &out)?;
    let worst = residual.max(iso).max(tw).max(cov);
    if worst > g.tolerance {
        return Err(Failure::math(format!("induction check defect {worst:e} exceeds the tolerance")));
    }
    Ok(())
}

fn cmd_vf_induce(g: &Global, datum: &Path, path: &Path, radius: usize, probes: usize) -> CliResult<()> {
    let d = parse_vf(&read(datum)?).context(datum.display())?;
    let rep = vf_validate(&d, probes, g.seed);
    eprintln!("{} table entries and {} probes checked", rep.entries_checked, rep.probes);
    if !rep.is_valid() {
        for f in &rep.failures {
            eprintln!("  {f}");
        }
        return Err(Failure::validation(format!("{}: datum fails validation", datum.display())));
    }
    let sys = load_with_forms(path)?;
    if sys.alphabet() != d.free_alphabet() {
        return Err(Failure::validation(format!(
            "{}: the system has rank {}, the datum's free subgroup has rank {}",
            path.display(),
            sys.alphabet().rank(),
            d.rank()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let f: Vec<MultVector> = (0..d.index()).map(|_| MultVector::random(sys.clone(), 1, &mut rng)).collect::<Result<_, _>>()?;
    let grp = d.group();
    let ball = grp.ball(radius);
    let backend = g.backend.primary();
    let mut w = csv_writer(
        g.output.as_deref(),
        &[("command", "vf-induce".into()), ("seed", g.seed.to_string()), ("radius", radius.to_string())],
    )?;
    w.write_record(["element", "re", "im"])?;
    for l in &ball {
        let c = induce_to_vf(&d, l, &f, &f, backend)?;
        w.write_record([grp.format(l), num(c.re), num(c.im)])?;
    }
    w.flush()?;
    let n = ball.len();
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = induce_to_vf(&d, &grp.mul(&grp.inverse(&ball[i]), &ball[j]), &f, &f, backend)?;
        }
    }
    let h = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let m = min_eigenvalue(&h);
    eprintln!("Gram matrix over {n} elements, min eigenvalue {}", num(m));
    if m < -1e-8 * h.norm().max(1.0) {
        return Err(Failure::math("Gram matrix is not positive semidefinite"));
    }
    Ok(())
}

fn cmd_herz(g: &Global, path: &Path, vector: Option<&Path>, radius: usize, refine: usize) -> CliResult<()> {
    let sys = load_with_forms(path)?;
    let v = load_vector(vector, &sys, g.seed)?;
    let mu = CylinderMeasure::spectral(&v);
    let al = sys.alphabet().clone();
    let mut w = csv_writer(
        g.output.as_deref(),
        &[("command", "herz".into()), ("seed", g.seed.to_string()), ("radius", radius.to_string())],
    )?;
    w.write_record(["x", "N", "lhs", "rhs", "margin", "pass"])?;
    let (mut total, mut failed) = (0usize, 0usize);
    for x in al.ball(radius)? {
        let n = x.len() + 1 + refine;
        let rep = herz_check_with(&v, &mu, &x, n).context(format!("word `{}`", al.format_word(&x)))?;
        total += 1;
        if !rep.pass {
            failed += 1;
        }
        w.write_record([
            al.format_word(&x),
            n.to_string(),
            num(rep.lhs),
            num(rep.rhs),
            num(rep.margin()),
            if rep.pass { "pass" } else { "fail" }.to_string(),
        ])?;
    }
    w.flush()?;
    eprintln!("herz: {} of {total} pass", total - failed);
    if failed > 0 {
        return Err(Failure::math(format!("{failed} words violate the majorization")));
    }
    Ok(())
}

fn cmd_demo(
    g: &Global,
    system: Option<&Path>,
    vector: Option<&Path>,
    uniform: bool,
    rank: usize,
    word: &str,
    max_power: usize,
) -> CliResult<()> {
    let (mu, kind) = if uniform {
        if rank == 0 || rank > 13 {
            return Err(Failure::validation(format!("--rank must lie in 1..=13, got {rank}")));
        }
        (CylinderMeasure::uniform(&Alphabet::standard(rank)), "uniform")
    } else {
        let path = system.ok_or_else(|| Failure::validation("--system or --uniform is required"))?;
        let sys = load_with_forms(path)?;
        (CylinderMeasure::spectral(&load_vector(vector, &sys, g.seed)?), "spectral")
    };
    let w0 = mu.alphabet().parse_reduced(word).context(format!("word `{word}`"))?;
    let rows = no_harish_chandra_demo(&mu, &w0, max_power)?;
    let mut w = csv_writer(
        g.output.as_deref(),
        &[("command", "demo-no-hc".into()), ("seed", g.seed.to_string()), ("measure", kind.into()), ("word", word.into())],
    )?;
    w.write_record(["n", "word_length", "phi"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.word_length.to_string(), num(r.phi)])?;
    }
    w.flush()?;
    Ok(())
}

fn spherical(rank: usize) -> Arc<SystemWithForms> {
    let q = (2 * rank - 1) as f64;
    let s = MatrixSystem::spherical(rank, 1.0 / q.sqrt());
    let b = boundary_reps::system::FormTuple::scalar(s.dims(), 1.0);
    SystemWithForms::new(s, b).expect("compatible").shared()
}

fn cmd_selftest(g: &Global) -> CliResult<()> {
    let mut failed = 0;
    let mut check = |name: &str, ok: CliResult<bool>| {
        let ok = ok.unwrap_or_else(|e| {
            eprintln!("  {name}: {e}");
            false
        });
        if !ok {
            failed += 1;
        }
        println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
    };
    let one = || CVector::from_element(1, C64::new(1.0, 0.0));
    let target = 1.0 / 3f64.sqrt();

    check("spherical spectral radius", (|| Ok((normalize(&MatrixSystem::spherical(2, 1.0))?.spectral_radius - 3.0).abs() <= 1e-9))());
    check(
        "spherical coefficient",
        (|| {
            let f = MultVector::seed_at(spherical(2), &Word::letter(0), one())?;
            let c = coefficient(&Word::letter(0), &f, &f, Backend::Brute)?;
            Ok((c.re - target).abs() <= 1e-12)
        })(),
    );
    check(
        "backend agreement",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let sys = spherical(2);
            let mut ok = true;
            for len in 0..6 {
                let f = MultVector::random(sys.clone(), 2, &mut rng)?;
                let x = random_word(sys.alphabet(), len, &mut rng);
                let a = coefficient(&x, &f, &f, Backend::Fast)?;
                let b = coefficient(&x, &f, &f, Backend::Brute)?;
                ok &= (a - b).norm() <= 1e-10 * f.norm_sq().max(1.0);
            }
            Ok(ok)
        })(),
    );
    check(
        "index-2 induction",
        (|| {
            let al = Alphabet::standard(2);
            let spec = boundary_reps::subgroups::QuotientSpec {
                group: boundary_reps::subgroups::FiniteGroup::Cyclic(vec![2]),
                images: vec![1, 1, 0, 0],
                subgroup: None,
            };
            let s = schreier(&coset_table_from_quotient(&al, &spec)?)?;
            let ind = induce_system(&spherical(3), &s)?;
            Ok(ind.system.dims() == [4, 4, 2, 2])
        })(),
    );
    check("PSL(2,Z) datum", Ok(vf_validate(&psl2z(), 200, g.seed).is_valid()));
    check(
        "Herz equality case",
        (|| {
            let f = MultVector::seed_at(spherical(2), &Word::letter(0), one())?;
            let rep = herz_check_with(&f, &CylinderMeasure::spectral(&f), &Word::letter(0), 2)?;
            Ok(rep.pass && (rep.rhs - target).abs() <= 1e-12)
        })(),
    );
    if failed > 0 {
        return Err(Failure::math(format!("{failed} self-test checks failed")));
    }
    Ok(())
}
