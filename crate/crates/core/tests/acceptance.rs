//! Acceptance criteria 1 to 9. Prints one line per criterion and exits
//! non-zero if any criterion fails that is not a documented known gap.

mod support;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use olpm::alphabet::{Symbol, SymbolSpace, Sync, Technical};
use olpm::enrich::{add_repeats, add_self_loops, add_skips};
use olpm::fsa::{
    closed_interpretation, enumerate, equivalent, enumerate_symbols, intersect_closed, intersect_open, Automaton,
    Letter, Pc,
};
use olpm::prosody::syllables;
use olpm::temiar::{cell_term, Aspect, Temiar, Voice, CELLS};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use support::{agree_upto, random_automaton, small_alphabet, small_sigma, Nfa};

const PARADIGM_BUDGET: Duration = Duration::from_secs(10);
const RANDOM_AUTOMATA: usize = 200;
const RANDOM_MAX_STATES: usize = 6;
const ORACLE_MAX_LEN: usize = 8;
const RANDOM_COMBINATIONS: usize = 50;

/// Criteria that are known not to hold for the grammar as listed; each is
/// recorded in the decisions ledger.
const KNOWN_GAPS: &[u32] = &[9];

const PARADIGM: &str = "\
voice\taspect\tkoow\tselog
active\tperfective\tkOOw\ts@lOg
active\tsimulfactive\tkakOOw\tsalOg
active\tcontinuative\tkEwkOOw\tsEglOg
causative\tperfective\ttErkOOw\tsErlOg
causative\tsimulfactive\tt@rakOOw\ts@ralOg
causative\tcontinuative\tt@rEwkOOw\ts@rEglOg
";

const MODIFICATION: &[(&str, &str)] = &[("yaap", "yEmyaap"), ("pet", "pEnp@t"), ("selook", "sENlOOk")];

type Outcome = Result<String, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn golden() -> Vec<(String, Voice, Aspect, String)> {
    let mut out = Vec::new();
    let rows: Vec<&str> = PARADIGM.lines().skip(1).collect();
    for (row, &(voice, aspect)) in rows.iter().zip(CELLS.iter()) {
        let cols: Vec<&str> = row.split('\t').collect();
        out.push(("koow".into(), voice, aspect, cols[2].into()));
        out.push(("selog".into(), voice, aspect, cols[3].into()));
    }
    for &(root, form) in MODIFICATION {
        out.push((root.into(), Voice::Active, Aspect::Continuative, form.into()));
    }
    out
}

fn criterion1(t: &Temiar) -> Outcome {
    let start = Instant::now();
    let table = t.paradigm_table(&["koow", "selog"]).map_err(err)?;
    let elapsed = start.elapsed();
    if table != PARADIGM {
        return Err(format!("table mismatch:\n{table}"));
    }
    if elapsed > PARADIGM_BUDGET {
        return Err(format!("took {elapsed:?}, budget {PARADIGM_BUDGET:?}"));
    }
    Ok(format!("12 forms exact in {:.2}s (budget 10s)", elapsed.as_secs_f64()))
}

fn criterion2(t: &Temiar) -> Outcome {
    for &(root, want) in MODIFICATION {
        let got = t.cell(root, Voice::Active, Aspect::Continuative).map_err(err)?.surfaces;
        if got != [want] {
            return Err(format!("{root}: got {got:?}, want [{want}]"));
        }
    }
    Ok("yEmyaap pEnp@t sENlOOk exact".into())
}

const SELOG_SYNC: &str = "[producer(s&':1'), producer(e&':0'), producer(l&':0'), producer(o&':0'), producer(g&':1')]";

fn criterion3(t: &Temiar) -> Outcome {
    let g = t.grammar();
    let selog = g.compile_str(SELOG_SYNC).map_err(err)?.normalize();
    let total = g.compile_str("[base, producer(repeat)*, base]").map_err(err)?;
    let lhs = intersect_open(&add_repeats(&selog).map_err(err)?, &total).map_err(err)?;
    let rhs = g
        .compile_str(&format!("[{SELOG_SYNC}, {}, {SELOG_SYNC}]", ["producer(repeat)"; 5].join(", ")))
        .map_err(err)?;
    if equivalent(&lhs, &rhs).map_err(err)? {
        Ok("add_repeats(selog) & total equals selog repeat^5 selog".into())
    } else {
        Err("not equivalent".into())
    }
}

/// Hand-written recognizer for `seg:1 skip* seg:1 repeat* seg:1 seg:0* seg:1`
/// with producer technical symbols.
fn semai_step(space: &SymbolSpace, state: u8, l: Letter) -> Option<(u8, Pc)> {
    let edge = |s: &Symbol| matches!(s, Symbol::Segment(x) if x.sync == Sync::Edge);
    let interior = |s: &Symbol| matches!(s, Symbol::Segment(x) if x.sync == Sync::Interior);
    let sym = space.symbol(l.symbol);
    let tech = |t| sym == Symbol::Technical(t);
    let next = match state {
        0 if edge(&sym) => (1, Pc::Consumer),
        1 if tech(Technical::Skip) => (1, Pc::Producer),
        1 if edge(&sym) => (2, Pc::Consumer),
        2 if tech(Technical::Repeat) => (2, Pc::Producer),
        2 if edge(&sym) => (3, Pc::Consumer),
        3 if interior(&sym) => (3, Pc::Consumer),
        3 if edge(&sym) => (4, Pc::Consumer),
        _ => return None,
    };
    Some((next.0, l.pc.or(next.1)))
}

fn criterion4(t: &Temiar) -> Outcome {
    let g = t.grammar();
    let space = t.space().clone();
    let full = "[producer(s&':1'&unstressed&'Ons'&initial), producer(e&':0'&unstressed&'Nuc'&medial), \
                producer(l&':0'&stressed&'Ons'&medial), producer(o&':0'&stressed&'Nuc'&medial), \
                producer(g&':1'&stressed&'Cod'&final)]";
    let selog = g.compile_str(full).map_err(err)?.normalize();
    let enriched = add_repeats(&add_skips(&selog).map_err(err)?.normalize()).map_err(err)?;
    let semai = g
        .compile_str("[consumer(':1'), producer(skip)*, consumer(':1'), producer(repeat)*, base]")
        .map_err(err)?;
    let got = enumerate(&intersect_open(&enriched, &semai).map_err(err)?, 24);

    let oracle = Nfa::from_automaton(&selog).add_skips(&space).add_repeats(&space);
    let mut want = BTreeSet::new();
    let mut stack = vec![(oracle.start, 0u8, Vec::<Letter>::new())];
    while let Some((q, s, w)) = stack.pop() {
        if oracle.finals[q] && s == 4 {
            want.insert(w.clone());
        }
        if w.len() == 24 {
            continue;
        }
        for &(l, p) in &oracle.trans[q] {
            if let Some((s2, pc)) = semai_step(&space, s, l) {
                let mut w2 = w.clone();
                w2.push(Letter { symbol: l.symbol, pc });
                stack.push((p, s2, w2));
            }
        }
    }
    let got_set: BTreeSet<Vec<Letter>> = got.iter().cloned().collect();
    if got_set != want {
        return Err(format!("engine {} strings, oracle {}", got_set.len(), want.len()));
    }
    let [w] = got.as_slice() else {
        return Err(format!("{} strings, want exactly 1", got.len()));
    };
    let skip = space.index_of(&Symbol::Technical(Technical::Skip));
    let repeat = space.index_of(&Symbol::Technical(Technical::Repeat));
    let shape: String = w
        .iter()
        .map(|l| match l.symbol {
            x if x == skip => 'K',
            x if x == repeat => 'R',
            _ => 'S',
        })
        .collect();
    if shape != "SKKKSRRRRRSSSSS" || w.iter().any(|l| l.pc != Pc::Producer) {
        return Err(format!("unexpected shape {shape}"));
    }
    Ok("exactly s skip^3 g repeat^5 s e l o g, matches oracle".into())
}

fn criterion5(space: &Arc<SymbolSpace>) -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let alphabet = small_alphabet(space);
    let sigma = small_sigma(space, &alphabet);
    for i in 0..RANDOM_AUTOMATA {
        let a = random_automaton(space, &alphabet, RANDOM_MAX_STATES, &mut rng).normalize();
        let plain = Nfa::from_automaton(&a);
        let checks = [
            ("add_repeats", add_repeats(&a).map_err(err)?, plain.add_repeats(space)),
            ("add_skips", add_skips(&a).map_err(err)?, plain.add_skips(space)),
            (
                "add_self_loops",
                intersect_open(&add_self_loops(&a), &sigma).map_err(err)?,
                plain.add_self_loops(&alphabet),
            ),
        ];
        for (name, engine, oracle) in checks {
            agree_upto(&Nfa::from_automaton(&engine), &oracle, ORACLE_MAX_LEN)
                .map_err(|e| format!("automaton {i}, {name}: {e}"))?;
        }
        let engine_words = enumerate(&add_repeats(&a).map_err(err)?, 4);
        let oracle_words = plain.add_repeats(space).words(4);
        let lhs: BTreeSet<_> = engine_words.into_iter().collect();
        let rhs: BTreeSet<_> = oracle_words.into_iter().collect();
        if lhs != rhs {
            return Err(format!("automaton {i}: add_repeats enumeration differs"));
        }
    }
    Ok(format!("{RANDOM_AUTOMATA} random automata agree on all strings up to length {ORACLE_MAX_LEN}"))
}

fn product_oracle(a: &Nfa, b: &Nfa, closed: bool) -> Nfa {
    let nb = b.finals.len();
    let n = a.finals.len() * nb;
    let mut trans = vec![Vec::new(); n];
    let mut finals = vec![false; n];
    for p in 0..a.finals.len() {
        for q in 0..nb {
            finals[p * nb + q] = a.finals[p] && b.finals[q];
            for &(la, ta) in &a.trans[p] {
                for &(lb, tb) in &b.trans[q] {
                    if la.symbol != lb.symbol {
                        continue;
                    }
                    let pc = if closed {
                        if la.pc != Pc::Producer || lb.pc != Pc::Producer {
                            continue;
                        }
                        Pc::Producer
                    } else {
                        la.pc.or(lb.pc)
                    };
                    trans[p * nb + q].push((Letter { symbol: la.symbol, pc }, ta * nb + tb));
                }
            }
        }
    }
    Nfa { start: a.start * nb + b.start, finals, trans }
}

fn labels_justified(r: &Automaton, a: &Automaton, b: &Automaton, closed: bool) -> bool {
    r.transitions().all(|(_, l, _)| {
        a.transitions().any(|(_, la, _)| {
            b.transitions().any(|(_, lb, _)| {
                let pc_ok = if closed {
                    la.pc == Pc::Producer && lb.pc == Pc::Producer && l.pc == Pc::Producer
                } else {
                    l.pc == la.pc.or(lb.pc)
                };
                pc_ok && l.set == la.set.intersection(&lb.set)
            })
        })
    })
}

fn criterion6(space: &Arc<SymbolSpace>) -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let alphabet = small_alphabet(space);
    for i in 0..RANDOM_AUTOMATA {
        let a = random_automaton(space, &alphabet, RANDOM_MAX_STATES, &mut rng);
        let b = random_automaton(space, &alphabet, RANDOM_MAX_STATES, &mut rng);
        let (na, nb) = (Nfa::from_automaton(&a), Nfa::from_automaton(&b));

        let c = closed_interpretation(&a);
        if c.transitions().any(|(_, l, _)| l.pc != Pc::Producer) {
            return Err(format!("automaton {i}: consumer survives closed interpretation"));
        }
        let mut producers = na.clone();
        for ts in &mut producers.trans {
            ts.retain(|(l, _)| l.pc == Pc::Producer);
        }
        agree_upto(&Nfa::from_automaton(&c), &producers, ORACLE_MAX_LEN)
            .map_err(|e| format!("automaton {i}, closed_interpretation: {e}"))?;

        for closed in [false, true] {
            let r = if closed { intersect_closed(&a, &b) } else { intersect_open(&a, &b) }.map_err(err)?;
            if !labels_justified(&r, &a, &b, closed) {
                return Err(format!("pair {i}: product transition without matching pc pair (closed={closed})"));
            }
            agree_upto(&Nfa::from_automaton(&r), &product_oracle(&na, &nb, closed), ORACLE_MAX_LEN)
                .map_err(|e| format!("pair {i}, closed={closed}: {e}"))?;
        }
    }
    Ok(format!("{RANDOM_AUTOMATA} random cases: closed drops consumers, open ORs pc, closed needs P&P"))
}

fn criterion7(t: &Temiar) -> Outcome {
    let g = t.grammar();
    let seg = |p: &str| format!("producer({p}&':1'&stressed&'Ons'&initial)");
    let u = g.compile_str(&format!("[{}, {}]", seg("k"), seg("'O'"))).map_err(err)?.normalize();
    let v = g.compile_str(&format!("[{}, {}]", seg("p"), seg("a"))).map_err(err)?.normalize();
    let separate = add_repeats(&u).map_err(err)?.union(&add_repeats(&v).map_err(err)?).map_err(err)?;
    let joint = add_repeats(&u.union(&v).map_err(err)?.normalize()).map_err(err)?;
    let x: BTreeSet<_> = enumerate_symbols(&separate, 6).into_iter().collect();
    let y: BTreeSet<_> = enumerate_symbols(&joint, 6).into_iter().collect();
    if !(x.is_subset(&y) && x.len() < y.len()) {
        return Err(format!("separate {} strings, joint {} strings", x.len(), y.len()));
    }
    let witness = y.difference(&x).next().expect("nonempty");
    let space = t.space();
    let witness: Vec<String> = witness
        .iter()
        .map(|&s| match space.symbol(s) {
            Symbol::Segment(x) => space.phoneme(x.phoneme).name.clone(),
            Symbol::Technical(_) => "repeat".into(),
        })
        .collect();
    Ok(format!("{} vs {} strings up to length 6, e.g. {}", x.len(), y.len(), witness.join(" ")))
}

fn criterion8(t: &Temiar) -> Outcome {
    let mut raw = Temiar::new().map_err(err)?;
    raw.set_optimize(false);
    for (root, voice, aspect, form) in golden() {
        let term = cell_term(&root, voice, aspect);
        let a = t.wordform(&term).map_err(err)?;
        if a.count_paths() != Some(1) || enumerate(&a, 64).len() != 1 {
            return Err(format!("{form}: {:?} accepting paths", a.count_paths()));
        }
        let unopt = raw.wordform(&term).map_err(err)?;
        if t.surfaces(&a) != raw.surfaces(&unopt) {
            return Err(format!("{form}: surfaces change without optimization"));
        }
    }
    Ok("15 golden forms have exactly one path; surfaces unchanged without optimization".into())
}

fn phonotactic_violations(t: &Temiar, term: &str) -> Result<Vec<String>, String> {
    let a = t.wordform(term).map_err(err)?;
    let space = t.space();
    let mut bad = Vec::new();
    for w in enumerate(&a, 64) {
        let segs: Vec<_> = w
            .iter()
            .filter_map(|l| match space.symbol(l.symbol) {
                Symbol::Segment(s) => Some(s),
                Symbol::Technical(_) => None,
            })
            .collect();
        let consonant = |i: Option<&olpm::alphabet::Segment>| i.is_some_and(|s| !space.phoneme(s.phoneme).is_vowel);
        let surface = olpm::temiar::surface(space, &w);
        if !consonant(segs.first()) || !consonant(segs.last()) || syllables(space, &segs).is_none() {
            bad.push(format!("{surface} ({term})"));
        }
    }
    Ok(bad)
}

fn criterion9(t: &Temiar) -> Outcome {
    let mut terms: Vec<String> = golden().iter().map(|(r, v, a, _)| cell_term(r, *v, *a)).collect();
    let roots: Vec<&str> = t.roots().collect();
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..RANDOM_COMBINATIONS {
        let root = roots[rng.gen_range(0..roots.len())];
        let (voice, aspect) = CELLS[rng.gen_range(0..CELLS.len())];
        terms.push(cell_term(root, voice, aspect));
    }
    let mut bad = BTreeSet::new();
    for term in &terms {
        bad.extend(phonotactic_violations(t, term)?);
    }
    if bad.is_empty() {
        Ok(format!("{} combinations: all CV/CVC, consonant-initial and -final", terms.len()))
    } else {
        Err(format!("{} combinations, violations: {}", terms.len(), bad.into_iter().collect::<Vec<_>>().join(", ")))
    }
}

fn main() {
    let t = Temiar::new().expect("built-in grammar loads");
    let space = t.space().clone();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "paradigm reproduction", criterion1(&t)),
        (2, "modification data", criterion2(&t)),
        (3, "copying identity", criterion3(&t)),
        (4, "semai pattern", criterion4(&t)),
        (5, "operator oracle equivalence", criterion5(&space)),
        (6, "resource semantics", criterion6(&space)),
        (7, "non-distributivity", criterion7(&t)),
        (8, "uniqueness after optimization", criterion8(&t)),
        (9, "emergent phonotactics", criterion9(&t)),
    ];
    let mut unexpected = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail}"),
            Err(detail) if KNOWN_GAPS.contains(n) => println!("criterion {n} FAIL (known gap) {name}: {detail}"),
            Err(detail) => {
                unexpected += 1;
                println!("criterion {n} FAIL {name}: {detail}");
            }
        }
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
