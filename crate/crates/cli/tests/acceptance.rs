//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hasa_cli::{check_report, Verdict};
use hasa_core::algebra::{complement, included, intersect, union, Limits};
use hasa_core::testkit::{self, all_trees, all_words, compare_with_oracle, labels, oracle_case, random_automaton, random_nfa, rng};
use hasa_core::testkit::{AutomatonShape, OracleLimits, OracleOutcome};
use hasa_core::{
    parallel_step, parallel_step_traced, post_script, HedgeAutomaton, HorizontalNfa, InsIntoMode, InstancePool, Label,
    State, Tree, UpdateKind, UpdateRule,
};

/// Criteria expected to fail, with the reason. Criterion 2 asks for a final
/// term with three inserted subtrees although the step has two targets; no
/// parallel step produces it. The rest of that example is checked.
const KNOWN_FAILURES: &[(u32, &str)] = &[(2, "the literal final term is unreachable: 3 insertions for 2 targets")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

fn t(s: &str) -> Tree {
    Tree::parse(s).unwrap()
}

fn within(limit: Duration, elapsed: Duration, outcome: Outcome) -> Outcome {
    if outcome.pass && elapsed > limit {
        fail(format!("{} but took {:.2?} (limit {:?})", outcome.detail, elapsed, limit))
    } else {
        outcome
    }
}

// Criterion 1

fn formula_value(t: &Tree) -> Option<bool> {
    let kids: Vec<bool> = t.children().iter().map(formula_value).collect::<Option<_>>()?;
    match (t.label().as_str(), kids.len()) {
        ("0", 0) => Some(false),
        ("1", 0) => Some(true),
        ("not", 1) => Some(!kids[0]),
        ("and", n) if n > 0 => Some(kids.iter().all(|b| *b)),
        ("or", n) if n > 0 => Some(kids.iter().any(|b| *b)),
        _ => None,
    }
}

// Preorder arity sequences of all ordered tree shapes with `n` nodes.
fn shapes(n: usize) -> Vec<Vec<usize>> {
    fn hedges(total: usize) -> Vec<Vec<Vec<usize>>> {
        if total == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for first in 1..=total {
            for s in shapes(first) {
                for rest in hedges(total - first) {
                    let mut h = vec![s.clone()];
                    h.extend(rest);
                    out.push(h);
                }
            }
        }
        out
    }
    hedges(n - 1)
        .into_iter()
        .map(|h| {
            let mut seq = vec![h.len()];
            for s in h {
                seq.extend(s);
            }
            seq
        })
        .collect()
}

fn build(arity: &[usize], labels: &[Label], pos: &mut usize) -> Tree {
    let i = *pos;
    *pos += 1;
    let children = (0..arity[i]).map(|_| build(arity, labels, pos)).collect();
    Tree::new(labels[i].clone(), children)
}

fn criterion_1() -> Outcome {
    let m = testkit::boolean();
    let formulas = testkit::boolean_formulas(7);
    for f in &formulas {
        let v = formula_value(f).expect("generator yields formulas");
        if m.accepts(f) != v {
            return fail(format!("disagreement on formula {f}"));
        }
    }
    // Any other labelled tree is not a formula and must be rejected.
    let alphabet = labels(&["0", "1", "not", "and", "or"]);
    let mut trees = 0u64;
    for n in 1..=6 {
        for arity in shapes(n) {
            let mut digits = vec![0usize; n];
            loop {
                let ls: Vec<Label> = digits.iter().map(|d| alphabet[*d].clone()).collect();
                let tree = build(&arity, &ls, &mut 0);
                trees += 1;
                if m.accepts(&tree) != (formula_value(&tree) == Some(true)) {
                    return fail(format!("disagreement on {tree}"));
                }
                let mut k = 0;
                while k < n && digits[k] + 1 == alphabet.len() {
                    digits[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
                digits[k] += 1;
            }
        }
    }
    let true_ones = formulas.iter().filter(|f| m.accepts(f)).count();
    pass(format!(
        "all {} formulas up to 7 nodes agree ({true_ones} true); all {trees} labelled trees up to 6 nodes agree",
        formulas.len()
    ))
}

// Criterion 2

fn criterion_2() -> Outcome {
    let r = UpdateRule::ins_after(Label::new("c").unwrap(), State::from("p"));
    let source = t("b(c,d(c(a),a))");
    let pool = InstancePool::from_instances([(State::from("p"), vec![t("a(b)"), t("a(c(a),c(a))")])]);
    let out = parallel_step(&source, &r, &pool).unwrap();
    let trace = parallel_step_traced(&source, &r, |p, _| {
        let u = if p.to_string() == "2.1" { "a(b)" } else { "a(c(a),c(a))" };
        (Some(t(u)), 0)
    });
    let order: Vec<String> = trace.iter().map(|(p, _)| p.to_string()).collect();
    let intermediate = trace[0].1.clone();
    let consistent = t("b(c,a(c(a),c(a)),d(c(a),a(b),a))");
    assert_eq!(order, ["2.1", "1"], "targets must be processed in decreasing order");
    assert_eq!(intermediate, t("b(c,d(c(a),a(b),a))"));
    assert_eq!(trace[1].1, consistent);
    assert!(out.contains(&consistent));
    assert_eq!(out.len(), 4);
    let literal = t("b(c,a(c(a),c(a)),a(b),d(c(a),a(b),a))");
    if out.contains(&literal) {
        pass("result set contains the expected term; intermediate reproduced")
    } else {
        fail(format!(
            "{literal} not in the {} results; intermediate {intermediate} and final {consistent} reproduced",
            out.len()
        ))
    }
}

// Criterion 3

fn criterion_3() -> Outcome {
    let r = UpdateRule::ins_first(Label::new("a").unwrap(), State::from("p"));
    let pool = InstancePool::from_instances([(State::from("p"), vec![t("d(e)")])]);
    let out = parallel_step(&t("a(a(b,c),b)"), &r, &pool).unwrap();
    let expected = BTreeSet::from([t("a(d(e),a(d(e),b,c),b)")]);
    let sequential = [t("a(a(d(e),d(e),b,c),b)"), t("a(d(e),d(e),a(b,c),b)")];
    if out == expected && sequential.iter().all(|s| !out.contains(s)) {
        pass("exactly { a(d(e),a(d(e),b,c),b) }")
    } else {
        fail(format!("got {out:?}"))
    }
}

// Criterion 4

fn word_nfa(words: &[&[&str]]) -> HorizontalNfa {
    words
        .iter()
        .map(|w| HorizontalNfa::word(&w.iter().map(|s| State::from(*s)).collect::<Vec<_>>()))
        .reduce(|a, b| a.union(&b).epsilon_eliminate())
        .unwrap()
}

fn nfa_equal(a: &HorizontalNfa, b: &HorizontalNfa) -> bool {
    a.inclusion_counterexample(b).is_none() && b.inclusion_counterexample(a).is_none()
}

fn criterion_4() -> Outcome {
    let post = post_script(&testkit::example_doc(), &testkit::example_script()).unwrap();
    let a = Label::new("a").unwrap();
    let c = Label::new("c").unwrap();
    let q = State::from;
    // q_b* g_a q_c
    let a1 = HorizontalNfa::from_parts(
        BTreeSet::new(),
        3,
        0,
        [2],
        [(0, Some(q("q_b")), 0), (0, Some(q("g_a")), 1), (1, Some(q("q_c")), 2)],
    );
    let checks = [
        ("B_{a,q_b}", post.rule(&a, &q("q_b")), HorizontalNfa::epsilon()),
        ("B_{c,q_c}", post.rule(&c, &q("q_c")), word_nfa(&[&["g_a"]])),
        ("B_{a,q_a1}", post.rule(&a, &q("q_a1")), a1),
    ];
    for (name, got, want) in &checks {
        match got {
            Some(got) if nfa_equal(got, want) => {}
            Some(_) => return fail(format!("{name} has the wrong language")),
            None => return fail(format!("{name} missing")),
        }
    }
    if post.rule(&Label::new("b").unwrap(), &q("q_b")).is_some() {
        return fail("the b rule survived the renaming");
    }
    let edited = t("a(a,a,a(b(d)),c(a(b(d))))");
    let original = t("a(b,b,c)");
    match post.run(&edited) {
        Some(run) if run.state == q("q_a1") && !post.accepts(&original) => {
            pass("three NFAs equal both ways; edited document accepted at q_a1, original rejected")
        }
        _ => fail("document checks failed"),
    }
}

// Criterion 5

fn criterion_5() -> Outcome {
    const CASES: usize = 20;
    let limits = OracleLimits::default();
    let mut summary = Vec::new();
    for kind in UpdateKind::ALL {
        let mut checked = 0;
        let mut rejected = 0;
        let mut searched = 0;
        let mut deepest = 0;
        let mut seed = 0u64;
        while checked < CASES {
            seed += 1;
            let Some(case) = oracle_case(seed * 7919 + kind as u64, &[kind], limits.post_bound) else {
                rejected += 1;
                continue;
            };
            checked += 1;
            match compare_with_oracle(&case, &limits) {
                Ok(OracleOutcome::Equal {
                    source_bound,
                    searched: s,
                    ..
                }) => {
                    searched += s;
                    deepest = deepest.max(source_bound);
                }
                Ok(other) => return fail(format!("{kind} seed {}: {other:?}", case.seed)),
                Err(e) => return fail(format!("{kind} seed {}: {e}", case.seed)),
            }
        }
        let extra = if searched > 0 { format!(", {searched} via source search") } else { String::new() };
        summary.push(format!("{kind} {checked} ok ({rejected} draws skipped, sources to {deepest}{extra})"));
    }
    pass(format!("trees up to 6 nodes, pools up to 6 nodes: {}", summary.join("; ")))
}

// Criterion 6

fn states_of(a: &HedgeAutomaton, t: &Tree) -> BTreeSet<State> {
    let kids: Vec<Vec<State>> = t.children().iter().map(|c| states_of(a, c).into_iter().collect()).collect();
    let mut words: Vec<Vec<State>> = vec![Vec::new()];
    for k in &kids {
        words = words
            .iter()
            .flat_map(|w| {
                k.iter().map(move |s| {
                    let mut w = w.clone();
                    w.push(s.clone());
                    w
                })
            })
            .collect();
    }
    a.rules_for(t.label())
        .filter(|(_, nfa)| words.iter().any(|w| nfa.accepts(w).unwrap_or(false)))
        .map(|(q, _)| q.clone())
        .collect()
}

fn member(a: &HedgeAutomaton, t: &Tree) -> bool {
    states_of(a, t).iter().any(|q| a.finals().contains(q))
}

fn criterion_6() -> Outcome {
    let sigma = labels(&["a", "b"]);
    let sigma_set: BTreeSet<Label> = sigma.iter().cloned().collect();
    let trees = all_trees(&sigma, 5);
    let mut counterexamples = 0;
    let pairs = 24;
    for seed in 0..pairs {
        let mut r = rng(seed);
        let a = random_automaton(&mut r, &AutomatonShape::new(sigma.clone(), 3, 3));
        let b = random_automaton(&mut r, &AutomatonShape::new(sigma.clone(), 3, 3).prefix("r"));
        let not_a = complement(&a, &sigma_set).unwrap();
        let both = intersect(&a, &b);
        let either = union(&a, &b);
        for tree in &trees {
            let (x, y) = (member(&a, tree), member(&b, tree));
            if not_a.accepts(tree) == x || both.accepts(tree) != (x && y) || either.accepts(tree) != (x || y) {
                return fail(format!("pair {seed} disagrees on {tree}"));
            }
        }
        for (l, r) in [(&a, &b), (&b, &a), (&both, &a), (&a, &either)] {
            let v = included(l, r).unwrap();
            let bounded = trees.iter().all(|t| !member(l, t) || member(r, t));
            if v.holds && !bounded {
                return fail(format!("pair {seed}: inclusion claimed but a small tree violates it"));
            }
            if let Some(ce) = v.counterexample {
                counterexamples += 1;
                if v.holds || !member(l, &ce) || member(r, &ce) {
                    return fail(format!("pair {seed}: counterexample {ce} does not re-verify"));
                }
            }
        }
    }
    pass(format!(
        "{pairs} pairs on {} trees up to 5 nodes; {counterexamples} counterexamples re-verified",
        trees.len()
    ))
}

// Criterion 7

// One guessed insertion point `s`: a copy for the prefix, a copy for the
// suffix and a single crossing edge reading p.
fn guess_at(b: &HorizontalNfa, s: usize, p: &State) -> HorizontalNfa {
    let n = b.num_states();
    let mut edges = Vec::new();
    for (x, sym, y) in b.transitions() {
        edges.push((x, sym.cloned(), y));
        edges.push((x + n, sym.cloned(), y + n));
    }
    edges.push((s, Some(p.clone()), s + n));
    HorizontalNfa::from_parts(b.alphabet().clone(), 2 * n, b.initial(), b.finals().iter().map(|f| f + n), edges)
}

fn reachable(b: &HorizontalNfa) -> Vec<usize> {
    let mut seen = vec![false; b.num_states()];
    let mut stack = vec![b.initial()];
    seen[b.initial()] = true;
    while let Some(x) = stack.pop() {
        for (_, y) in b.edges(x) {
            if !seen[*y] {
                seen[*y] = true;
                stack.push(*y);
            }
        }
    }
    (0..b.num_states()).filter(|s| seen[*s]).collect()
}

fn criterion_7() -> Outcome {
    let symbols = testkit::states(&["x", "y"]);
    let p = State::from("p");
    let mut alphabet = symbols.clone();
    alphabet.push(p.clone());
    let words = all_words(&alphabet, 5);
    let count = 25;
    for seed in 0..count {
        let mut r = rng(7000 + seed);
        let b = random_nfa(&mut r, &symbols, 1 + (seed as usize % 5), false);
        let two_copy = b.insert_anywhere(&p);
        let guesses: Vec<HorizontalNfa> = reachable(&b).into_iter().map(|s| guess_at(&b, s, &p)).collect();
        for w in &words {
            let by_guess = guesses.iter().any(|g| g.accepts(w).unwrap());
            if two_copy.accepts(w).unwrap() != by_guess {
                return fail(format!("NFA {seed} differs on {w:?}"));
            }
        }
    }
    pass(format!("{count} NFAs, {} words up to length 5 each", words.len()))
}

// Criterion 8

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let from = testkit::xmark();
    let to = testkit::xmark_evolved();
    let script = testkit::xmark_script();
    let parsed = start.elapsed();
    let (report, _) = check_report(&from, &to, &script, InsIntoMode::Anywhere, &Limits::default()).unwrap();
    let elapsed = start.elapsed();
    if report.verdict != Verdict::Conforms {
        return fail(format!("verdict {:?}", report.verdict));
    }
    let (bad, _) = check_report(
        &from,
        &testkit::xmark_evolved_no_currency(),
        &script,
        InsIntoMode::Anywhere,
        &Limits::default(),
    )
    .unwrap();
    if bad.verdict != Verdict::Violates {
        return fail("the target without the currency change was accepted");
    }
    let detail = format!(
        "{} elements, {} rules: conforms in {:.0} ms (parse {:.0}, post {:.0}, inclusion {:.0}); broken target rejected",
        from.alphabet().len(),
        script.rules().len(),
        elapsed.as_secs_f64() * 1000.0,
        parsed.as_secs_f64() * 1000.0,
        report.timings["post"],
        report.timings["inclusion"],
    );
    within(Duration::from_secs(1), elapsed, pass(detail))
}

fn main() -> ExitCode {
    type Criterion = fn() -> Outcome;
    let criteria: [(u32, &str, Duration, Criterion); 8] = [
        (1, "Boolean automaton, exhaustive up to 7 nodes", Duration::from_secs(10), criterion_1),
        (2, "parallel INS_AFTER step", Duration::MAX, criterion_2),
        (3, "INS_FIRST is parallel, not sequential", Duration::MAX, criterion_3),
        (4, "worked example Post NFAs", Duration::from_secs(5), criterion_4),
        (5, "Post equals the concrete oracle, 8 kinds x 20", Duration::from_secs(300), criterion_5),
        (6, "complement, intersection, union, inclusion", Duration::from_secs(120), criterion_6),
        (7, "INS_INTO two-copy equals union of guesses", Duration::MAX, criterion_7),
        (8, "XMark-scale check under 1 s", Duration::MAX, criterion_8),
    ];
    let mut unexpected = 0;
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let outcome = within(limit, elapsed, outcome);
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{name}]: {verdict} in {elapsed:.2?}: {}", outcome.detail);
        if !outcome.pass {
            match KNOWN_FAILURES.iter().find(|(k, _)| *k == n) {
                Some((_, why)) => println!("    known failure: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
