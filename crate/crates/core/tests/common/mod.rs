//! Shared helpers: corpus access, a CLI runner, a seeded random KB generator
//! and a naive matrix oracle for compositional saturation.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;

use procid::{Category, Interval, KbBuilder, KnowledgeBase, Options, Relation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus(name: &str) -> PathBuf {
    corpus_dir().join(name)
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap()
}

pub fn load(name: &str) -> KnowledgeBase {
    load_text(&read_corpus(name), name)
}

pub fn load_text(text: &str, file: &str) -> KnowledgeBase {
    let parsed = procid::parse(text, file, Options::default());
    assert!(!parsed.has_parse_errors(), "{file}: {:?}", parsed.diagnostics);
    parsed.kb
}

pub fn corpus_files() -> Vec<std::path::PathBuf> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "kb"))
        .collect();
    files.sort();
    files
}

pub fn fact_set(kb: &KnowledgeBase) -> BTreeSet<String> {
    kb.facts().iter().map(|f| kb.render_fact(f)).collect()
}

pub fn entity_set(kb: &KnowledgeBase) -> BTreeSet<String> {
    kb.entities()
        .iter()
        .map(|e| format!("{} {} {:?} {:?}", e.id, e.category, e.label, e.extent.map(|x| x.to_string())))
        .collect()
}

/// Parsing the serialized form gives back the same entities, facts, classes
/// and options, and serializing again is a fixpoint.
pub fn round_trips(text: &str, name: &str) -> Result<(), String> {
    let first = procid::parse(text, name, Options::default());
    if first.has_parse_errors() {
        return Err(format!("{name}: {:?}", first.diagnostics));
    }
    let printed = procid::serialize(&first.kb);
    let second = procid::parse(&printed, name, Options::default());
    if !second.diagnostics.is_empty() {
        return Err(format!("{name}: reparse reported {:?}", second.diagnostics));
    }
    let (a, b) = (&first.kb, &second.kb);
    if fact_set(a) != fact_set(b) || entity_set(a) != entity_set(b) {
        return Err(format!("{name}: content changed"));
    }
    if a.options() != b.options() || a.classes().collect::<Vec<_>>() != b.classes().collect::<Vec<_>>() {
        return Err(format!("{name}: options or classes changed"));
    }
    if procid::serialize(b) != printed {
        return Err(format!("{name}: serialization is not a fixpoint"));
    }
    Ok(())
}

pub struct Run {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn procid(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_procid")).args(args).output().unwrap();
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap_or(-1),
    }
}

/// Negative corpus files paired with the code and line from their
/// `# expect: CODE line N` header.
pub fn negative_cases() -> Vec<(PathBuf, String, usize)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir().join("negative"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "kb"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let header = text.lines().next().unwrap();
            let words: Vec<&str> = header.split_whitespace().collect();
            assert_eq!(&words[..2], ["#", "expect:"], "{}", p.display());
            assert_eq!(words[3], "line");
            (p, words[2].to_string(), words[4].parse().unwrap())
        })
        .collect()
}

/// A small random KB: processes (some spatial), qualities, material
/// entities, temporal regions from a few extents, and optionally GDCs.
/// Facts that the builder rejects are dropped.
pub fn random_kb(seed: u64) -> KnowledgeBase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extended = rng.gen_bool(0.5);
    let mut b = KbBuilder::new(Options { extended_simple: extended, ..Options::default() });

    let scenario = rng.gen_bool(0.4);
    let n_proc = if scenario { 5 } else { rng.gen_range(3..=5) };
    let n_q = if scenario { 3 } else { rng.gen_range(1..=3) };
    let n_g = if extended { rng.gen_range(0..=1) } else { 0 };
    let n_m = rng.gen_range(1..=2 - n_g);
    let n_t = rng.gen_range(1..=2);

    let mut procs = Vec::new();
    for i in 0..n_proc {
        let id = format!("p{i}");
        let cat = if rng.gen_bool(0.35) { Category::SpatialChange } else { Category::Process };
        b.add_entity(&id, cat, None).unwrap();
        procs.push(id);
    }
    let mut quals = Vec::new();
    for i in 0..n_q {
        let id = format!("q{i}");
        b.add_entity(&id, Category::Quality, None).unwrap();
        quals.push(id);
    }
    let mut mats = Vec::new();
    for i in 0..n_m {
        let id = format!("m{i}");
        b.add_entity(&id, Category::MaterialEntity, None).unwrap();
        mats.push(id);
    }
    let mut times = Vec::new();
    let extents = [(0, 1), (0, 2), (1, 2)];
    for i in 0..n_t {
        let id = format!("t{i}");
        b.add_entity(&id, Category::TemporalRegion, None).unwrap();
        if rng.gen_bool(0.6) {
            let (s, e) = *extents.choose(&mut rng).unwrap();
            b.set_extent(&id, Interval::integers(s, e).unwrap()).unwrap();
        }
        times.push(id);
    }
    let mut gdcs = Vec::new();
    for i in 0..n_g {
        let id = format!("g{i}");
        b.add_entity(&id, Category::GenericallyDependentContinuant, None).unwrap();
        gdcs.push(id);
    }

    // Sometimes give the first processes their own pairwise distinct
    // qualities, so that aggregates of them have distinguishable witnesses.
    let mut n_facts: usize = rng.gen_range(4..=30);
    if scenario {
        for (i, q) in quals.iter().enumerate() {
            for q2 in &quals[i + 1..] {
                b.assert_fact(Relation::Neq, &[q, q2]).unwrap();
            }
            if let Some(p) = procs.get(i) {
                b.assert_fact(Relation::Psdc, &[p, q]).unwrap();
                b.assert_fact(Relation::Otr, &[p, &times[0]]).unwrap();
            }
        }
        let k = quals.len().min(procs.len() - 2);
        if k >= 2 {
            let (a, c) = (procs.len() - 2, procs.len() - 1);
            let second = if k >= 3 { *[[0, 2], [1, 2], [0, 1]].choose(&mut rng).unwrap() } else { [0, 1] };
            b.assert_fact(Relation::Sum, &[&procs[a], &procs[0], &procs[1]]).unwrap();
            b.assert_fact(Relation::Sum, &[&procs[c], &procs[second[0]], &procs[second[1]]]).unwrap();
        }
        n_facts = n_facts.saturating_sub(11).max(4);
    }
    for _ in 0..n_facts {
        let p = procs.choose(&mut rng).unwrap().clone();
        let p2 = procs.choose(&mut rng).unwrap().clone();
        let (rel, args): (Relation, Vec<String>) = match rng.gen_range(0..12) {
            0 | 1 => (Relation::Psdc, vec![p, quals.choose(&mut rng).unwrap().clone()]),
            2 | 3 => (Relation::Otr, vec![p, times.choose(&mut rng).unwrap().clone()]),
            4 => (Relation::Pcsp, vec![mats.choose(&mut rng).unwrap().clone(), p]),
            5 => (Relation::P, vec![p, p2]),
            6 => {
                let (a, c) = (mats.choose(&mut rng).unwrap().clone(), mats.choose(&mut rng).unwrap().clone());
                (Relation::P, vec![a, c])
            }
            7 | 8 => {
                let k = rng.gen_range(2..=3);
                let mut args = vec![p];
                args.extend((0..k).map(|_| procs.choose(&mut rng).unwrap().clone()));
                (Relation::Sum, args)
            }
            9 if !gdcs.is_empty() => (Relation::Pgdc, vec![p, gdcs.choose(&mut rng).unwrap().clone()]),
            9 => (Relation::Pcsp, vec![mats.choose(&mut rng).unwrap().clone(), p]),
            10 => {
                let pool = [&quals, &quals, &mats, &times].choose(&mut rng).unwrap().to_vec();
                (Relation::Neq, two_of(&pool, &mut rng))
            }
            _ if rng.gen_bool(0.5) => {
                let k = rng.gen_range(2..=3);
                let mut args = vec![p];
                args.extend((0..k).map(|_| procs.choose(&mut rng).unwrap().clone()));
                (Relation::Sum, args)
            }
            _ => {
                let pool = [&procs, &quals, &mats].choose(&mut rng).unwrap().to_vec();
                let rel = if rng.gen_bool(0.3) { Relation::Eq } else { Relation::Neq };
                (rel, two_of(&pool, &mut rng))
            }
        };
        let _ = b.assert_fact(rel, &args);
    }
    b.finish()
}

/// Adds dispositions and realizations to a random KB.
pub fn with_realizations(seed: u64) -> KnowledgeBase {
    let base = random_kb(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut b = base.to_builder();
    let disps = ["d0", "d1"];
    for d in disps {
        b.add_entity(d, Category::Disposition, None).unwrap();
    }
    if rng.gen_bool(0.5) {
        b.assert_fact(Relation::Neq, &disps).unwrap();
    }
    let procs: Vec<String> = base.declared_in(Category::Process).map(|p| base.name(p).to_string()).collect();
    let times: Vec<String> = base.declared_in(Category::TemporalRegion).map(|t| base.name(t).to_string()).collect();
    for p in &procs {
        for _ in 0..rng.gen_range(0..=2) {
            let d = disps[rng.gen_range(0..2)];
            let t = &times[rng.gen_range(0..times.len())];
            b.assert_fact(Relation::Real, &[d, p.as_str(), t.as_str()]).unwrap();
        }
    }
    b.finish()
}

/// Two different members when the pool allows it.
fn two_of(pool: &[String], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut picked: Vec<String> = pool.choose_multiple(rng, 2).cloned().collect();
    if picked.len() < 2 {
        picked.push(picked[0].clone());
    }
    picked
}

/// Equality and distinctness as boolean matrices over entity indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub eq: Vec<Vec<bool>>,
    pub neq: Vec<Vec<bool>>,
}

impl Closure {
    pub fn of_engine(kb: &KnowledgeBase, state: &procid::DerivationState) -> Closure {
        let ids: Vec<_> = kb.entity_ids().collect();
        Closure {
            eq: ids.iter().map(|&a| ids.iter().map(|&b| state.same(a, b)).collect()).collect(),
            neq: ids.iter().map(|&a| ids.iter().map(|&b| state.distinct(a, b)).collect()).collect(),
        }
    }

    /// First differing cell, by entity names, for failure messages.
    pub fn first_difference(&self, other: &Closure, kb: &KnowledgeBase) -> Option<String> {
        for i in 0..self.eq.len() {
            for j in 0..self.eq.len() {
                let (a, b) = (kb.name(procid::EntityId(i as u32)), kb.name(procid::EntityId(j as u32)));
                if self.eq[i][j] != other.eq[i][j] {
                    return Some(format!("eq({a}, {b}): {} vs {}", self.eq[i][j], other.eq[i][j]));
                }
                if self.neq[i][j] != other.neq[i][j] {
                    return Some(format!("neq({a}, {b}): {} vs {}", self.neq[i][j], other.neq[i][j]));
                }
            }
        }
        None
    }
}

struct Facts {
    rel: Relation,
    args: Vec<usize>,
}

/// Naive fixpoint of the compositional criterion. Assumes no `locatedAt`
/// facts, so spatial changes are exactly the declared ones.
pub struct Oracle {
    n: usize,
    facts: Vec<Facts>,
    extended: bool,
    spatial: Vec<bool>,
    simple: Vec<bool>,
    eq_edges: Vec<(usize, usize)>,
    neq_edges: Vec<(usize, usize)>,
    eq: Vec<Vec<bool>>,
    neq: Vec<Vec<bool>>,
}

impl Oracle {
    pub fn new(kb: &KnowledgeBase) -> Oracle {
        assert!(kb.facts().iter().all(|f| f.relation != Relation::LocatedAt));
        let n = kb.len();
        let extended = kb.options().extended_simple;
        let facts: Vec<Facts> = kb
            .facts()
            .iter()
            .map(|f| Facts { rel: f.relation, args: f.args.iter().map(|a| a.index()).collect() })
            .collect();
        let spatial: Vec<bool> = kb.entity_ids().map(|e| kb.category(e) == Category::SpatialChange).collect();
        let mut simple = spatial.clone();
        for f in &facts {
            if f.rel == Relation::Psdc || (extended && f.rel == Relation::Pgdc) {
                simple[f.args[0]] = true;
            }
        }
        let mut eq_edges = Vec::new();
        let mut neq_edges = Vec::new();
        for f in &facts {
            match f.rel {
                Relation::Eq => eq_edges.push((f.args[0], f.args[1])),
                Relation::Neq => neq_edges.push((f.args[0], f.args[1])),
                _ => {}
            }
        }
        let timed: Vec<(usize, Interval)> =
            kb.entity_ids().filter_map(|e| kb.extent(e).map(|x| (e.index(), x))).collect();
        for &(a, x) in &timed {
            for &(b, y) in &timed {
                if a < b {
                    if x == y {
                        eq_edges.push((a, b));
                    } else {
                        neq_edges.push((a, b));
                    }
                }
            }
        }
        let mut o = Oracle {
            n,
            facts,
            extended,
            spatial,
            simple,
            eq_edges,
            neq_edges,
            eq: vec![vec![false; n]; n],
            neq: vec![vec![false; n]; n],
        };
        o.close();
        o
    }

    fn close(&mut self) {
        let n = self.n;
        let mut eq = vec![vec![false; n]; n];
        for (i, row) in eq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in &self.eq_edges {
            eq[a][b] = true;
            eq[b][a] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if eq[i][k] {
                    for j in 0..n {
                        if eq[k][j] {
                            eq[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut neq = vec![vec![false; n]; n];
        for &(a, b) in &self.neq_edges {
            for x in 0..n {
                for y in 0..n {
                    if eq[x][a] && eq[y][b] {
                        neq[x][y] = true;
                        neq[y][x] = true;
                    }
                }
            }
        }
        self.eq = eq;
        self.neq = neq;
    }

    fn of(&self, rel: Relation) -> impl Iterator<Item = &Vec<usize>> {
        self.facts.iter().filter(move |f| f.rel == rel).map(|f| &f.args)
    }

    fn simple_class(&self, x: usize) -> bool {
        (0..self.n).any(|y| self.eq[x][y] && self.simple[y])
    }

    fn spatial_class(&self, x: usize) -> bool {
        (0..self.n).any(|y| self.eq[x][y] && self.spatial[y])
    }

    fn same_sets(&self, xs: &[usize], ys: &[usize]) -> bool {
        xs.iter().all(|&x| ys.iter().any(|&y| self.eq[x][y])) && ys.iter().all(|&y| xs.iter().any(|&x| self.eq[x][y]))
    }

    /// Some member of `xs` is distinct from every member of `ys`.
    fn outside(&self, xs: &[usize], ys: &[usize]) -> bool {
        xs.iter().any(|&x| ys.iter().all(|&y| self.neq[x][y]))
    }

    fn parthood(&self) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut pm = self.eq.clone();
        for f in self.of(Relation::P) {
            for a in 0..n {
                for b in 0..n {
                    if self.eq[a][f[0]] && self.eq[b][f[1]] {
                        pm[a][b] = true;
                    }
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                if pm[i][k] {
                    for j in 0..n {
                        if pm[k][j] {
                            pm[i][j] = true;
                        }
                    }
                }
            }
        }
        pm
    }

    fn monotone(&self, eqs: &mut Vec<(usize, usize)>, neqs: &mut Vec<(usize, usize)>) {
        let n = self.n;
        // functional relations
        for rel in [Relation::Inh, Relation::Ostr, Relation::Otr, Relation::Psdc, Relation::Pgdc] {
            for f in self.of(rel) {
                for g in self.of(rel) {
                    if self.eq[f[0]][g[0]] {
                        eqs.push((f[1], g[1]));
                    }
                }
            }
        }
        // dependent changes
        let mut dep = vec![Relation::Psdc];
        if self.extended {
            dep.push(Relation::Pgdc);
        }
        for rel in dep {
            for c1 in self.of(rel) {
                for c2 in self.of(rel) {
                    for o1 in self.of(Relation::Otr) {
                        for o2 in self.of(Relation::Otr) {
                            if !self.eq[c1[0]][o1[0]] || !self.eq[c2[0]][o2[0]] {
                                continue;
                            }
                            if self.eq[c1[1]][c2[1]] && self.eq[o1[1]][o2[1]] {
                                eqs.push((c1[0], c2[0]));
                            }
                            if self.neq[c1[1]][c2[1]] || self.neq[o1[1]][o2[1]] {
                                neqs.push((c1[0], c2[0]));
                            }
                        }
                    }
                }
            }
        }
        // spatial changes at distinct times
        for g in self.of(Relation::Otr) {
            for h in self.of(Relation::Otr) {
                if self.spatial_class(g[0]) && self.spatial_class(h[0]) && self.neq[g[1]][h[1]] {
                    neqs.push((g[0], h[0]));
                }
            }
        }
        // sums: equal part sets give equal wholes (simple or not)
        for f in self.of(Relation::Sum) {
            for g in self.of(Relation::Sum) {
                if self.same_sets(&f[1..], &g[1..]) {
                    eqs.push((f[0], g[0]));
                }
            }
        }
        // mutual parthood
        let pm = self.parthood();
        for a in 0..n {
            for b in 0..n {
                if pm[a][b] && pm[b][a] {
                    eqs.push((a, b));
                }
            }
        }
    }

    fn participants(&self, p: usize) -> Vec<usize> {
        self.of(Relation::Pcsp).filter(|f| self.eq[f[1]][p]).map(|f| f[0]).collect()
    }

    fn aggregate(&self, c: usize) -> bool {
        self.of(Relation::Sum).any(|f| {
            let parts = &f[1..];
            self.eq[f[0]][c]
                && parts.iter().all(|&x| self.simple_class(x) && !self.eq[x][c])
                && parts.iter().any(|&x| !self.eq[x][parts[0]])
        })
    }

    fn simple_sums(&self, c: usize) -> Vec<&[usize]> {
        self.of(Relation::Sum)
            .filter(|f| self.eq[f[0]][c] && f[1..].iter().all(|&x| self.simple_class(x)))
            .map(|f| &f[1..])
            .collect()
    }

    fn batch(&self, eqs: &mut Vec<(usize, usize)>, neqs: &mut Vec<(usize, usize)>) {
        let n = self.n;
        // participant sets of spatial changes
        for g in self.of(Relation::Otr) {
            for h in self.of(Relation::Otr) {
                let (p, q) = (g[0], h[0]);
                if self.eq[p][q] || !self.spatial_class(p) || !self.spatial_class(q) {
                    continue;
                }
                let (s1, s2) = (self.participants(p), self.participants(q));
                if self.same_sets(&s1, &s2) {
                    if self.eq[g[1]][h[1]] {
                        eqs.push((p, q));
                    }
                } else if self.outside(&s1, &s2) || self.outside(&s2, &s1) {
                    neqs.push((p, q));
                }
            }
        }
        // aggregates with pairwise different witness lists
        for a in 0..n {
            for b in 0..n {
                if self.eq[a][b] || !self.aggregate(a) || !self.aggregate(b) {
                    continue;
                }
                let (l1, l2) = (self.simple_sums(a), self.simple_sums(b));
                let differ = l1.iter().all(|x| l2.iter().all(|y| self.outside(x, y) || self.outside(y, x)));
                if differ {
                    neqs.push((a, b));
                }
            }
        }
        // composites with the same proper parts
        let pm = self.parthood();
        let proper = |x: usize| -> Vec<bool> { (0..n).map(|y| pm[y][x] && !self.eq[y][x]).collect() };
        for a in 0..n {
            for b in 0..n {
                let pa = proper(a);
                if !self.eq[a][b] && pa.iter().any(|&v| v) && pa == proper(b) {
                    eqs.push((a, b));
                }
            }
        }
    }

    /// Adds proposals; true when something new was implied.
    fn absorb(&mut self, eqs: Vec<(usize, usize)>, neqs: Vec<(usize, usize)>) -> bool {
        let mut new = false;
        for (a, b) in eqs {
            if !self.eq[a][b] {
                self.eq_edges.push((a, b));
                new = true;
            }
        }
        for (a, b) in neqs {
            if !self.neq[a][b] {
                self.neq_edges.push((a, b));
                new = true;
            }
        }
        self.close();
        new
    }

    pub fn run(mut self) -> Closure {
        loop {
            loop {
                let (mut e, mut d) = (Vec::new(), Vec::new());
                self.monotone(&mut e, &mut d);
                if !self.absorb(e, d) {
                    break;
                }
            }
            let (mut e, mut d) = (Vec::new(), Vec::new());
            self.batch(&mut e, &mut d);
            if !self.absorb(e, d) {
                break;
            }
        }
        Closure { eq: self.eq, neq: self.neq }
    }

    /// Monotone rules only.
    pub fn run_monotone(mut self) -> Closure {
        loop {
            let (mut e, mut d) = (Vec::new(), Vec::new());
            self.monotone(&mut e, &mut d);
            if !self.absorb(e, d) {
                break;
            }
        }
        Closure { eq: self.eq, neq: self.neq }
    }
}

/// Engine saturation under a shuffled order of the compositional rules.
pub fn engine_shuffled(kb: &KnowledgeBase, rng: &mut ChaCha8Rng) -> procid::Saturation {
    let crit = procid::Criterion::Compositional;
    let mut mono = crit.monotone_rules(kb);
    let mut batch = crit.batch_rules();
    mono.shuffle(rng);
    batch.shuffle(rng);
    procid::compositional::saturate_ordered(kb, crit, &mono, &batch)
}

/// A parthood graph over `n` material entities with asserted equalities.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub eqs: Vec<(usize, usize)>,
}

impl Graph {
    pub fn random(rng: &mut ChaCha8Rng) -> Graph {
        let n = rng.gen_range(1..=10);
        let edges = (0..rng.gen_range(0..=2 * n)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let eqs = (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        Graph { n, edges, eqs }
    }

    pub fn kb(&self) -> KnowledgeBase {
        let mut b = KbBuilder::new(Options::default());
        for i in 0..self.n {
            b.add_entity(&format!("e{i}"), Category::MaterialEntity, None).unwrap();
        }
        for &(x, y) in &self.edges {
            b.assert_fact(Relation::P, &[format!("e{x}"), format!("e{y}")]).unwrap();
        }
        for &(x, y) in &self.eqs {
            b.assert_fact(Relation::Eq, &[format!("e{x}"), format!("e{y}")]).unwrap();
        }
        b.finish()
    }

    /// Reflexive-transitive closure of the edges over the classes of `eq`.
    pub fn closure(&self, eq: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut pm = eq.to_vec();
        for &(x, y) in &self.edges {
            for a in 0..n {
                for c in 0..n {
                    if eq[a][x] && eq[c][y] {
                        pm[a][c] = true;
                    }
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if pm[i][k] && pm[k][j] {
                        pm[i][j] = true;
                    }
                }
            }
        }
        pm
    }
}

/// part_of agrees with a matrix closure and is reflexive and transitive;
/// after saturation it is antisymmetric up to equality, and composites with
/// the same proper parts are identified.
pub fn check_mereology(g: &Graph) -> Result<(), String> {
    use procid::mereology::Mereology;
    use procid::{DerivationState, EntityId};
    let kb = g.kb();
    let n = g.n;
    let id = |i: usize| EntityId(i as u32);
    let seeded = DerivationState::seeded(&kb);
    let eq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| seeded.same(id(i), id(j))).collect()).collect();
    let want = g.closure(&eq);
    let m = Mereology::with_state(&kb, &seeded);
    for i in 0..n {
        if !m.part_of(id(i), id(i)) {
            return Err(format!("{g:?}: e{i} is not part of itself"));
        }
        for j in 0..n {
            if m.part_of(id(i), id(j)) != want[i][j] {
                return Err(format!("{g:?}: part_of(e{i}, e{j}) disagrees with the matrix closure"));
            }
            for k in 0..n {
                if m.part_of(id(i), id(j)) && m.part_of(id(j), id(k)) && !m.part_of(id(i), id(k)) {
                    return Err(format!("{g:?}: not transitive at e{i}, e{j}, e{k}"));
                }
            }
        }
    }
    let sat = procid::saturate(&kb);
    let m = Mereology::with_state(&kb, &sat.state);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (id(i), id(j));
            if m.part_of(a, b) && m.part_of(b, a) && !sat.state.same(a, b) {
                return Err(format!("{g:?}: e{i} and e{j} are mutual parts but not identified"));
            }
            let pa = m.proper_part_classes(a);
            if !pa.is_empty() && pa == m.proper_part_classes(b) && !sat.state.same(a, b) {
                return Err(format!("{g:?}: e{i} and e{j} share their proper parts but are not identified"));
            }
        }
    }
    Ok(())
}
