//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines always reach the output; exits 1 if any check fails.

mod common;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chemanchor::activation::{build_prompt, build_reaction_context, Resolver};
use chemanchor::anchor::{compute_anchors, parse_hybrid, serialize_hybrid};
use chemanchor::coco::CocoDataset;
use chemanchor::datagen::{
    parse_source, plan, write_dataset, DatagenError, DatasetSample, GenerateConfig, Generator, SampleKind, SourceSet,
};
use chemanchor::dvm::{anchor_direction, match_anchors, reconstruct};
use chemanchor::fgdict::{decompose, Dictionary, FunctionalGroupTemplate};
use chemanchor::fingerprint::l1_score;
use chemanchor::molgraph::canonical_smiles;
use chemanchor::reaction::{elements_from_coco, parse_layout, split_conditions, ReactionRecord, Role, SolventLexicon};
use chemanchor::{generate_2d_coords, BBox, Element, MolecularGraph, Point};
use common::{data_path, isomorphic, mol, read_smiles};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SUZUKI_BLOCK: &str = "Reactant1: COC(=O)c1ccc(-c2ccc(Br)cc2)cc1, Synonyms: methyl 4'-bromo[1,1'-biphenyl]-4-carboxylate, IUPAC Name: methyl 4-(4-bromophenyl)benzoate, Reagents2: OB(O)c1ccccc1, Synonyms: Phenylboronic acid, IUPAC Name: phenylboronic acid, Product1: COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1, Synonyms: , IUPAC Name: methyl 4-(4-phenylphenyl)benzoate, Reagents: Pd(OAc)2, PPh3, TBAB ; solvents: Toluene, H2O";
const BORONIC_PROMPT: &str = "Image shows [Phenylboronic acid, phenylboronic acid] (SMILES: [OB(O)c1ccccc1]). Analyze...";

type Check = Result<String, String>;

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    })
}

fn corpus() -> Vec<String> {
    read_smiles("data/corpus.smi")
        .into_iter()
        .map(|l| l.split_whitespace().next().unwrap_or_default().to_string())
        .collect()
}

fn round_trip(smiles: &str, dict: &Dictionary) -> Result<BTreeSet<String>, String> {
    let g = mol(smiles);
    let expected = canonical_smiles(&g).map_err(|e| e.to_string())?;
    let g = generate_2d_coords(&g).graph;
    let d = decompose(&g, dict).map_err(|e| e.to_string())?;
    let (hybrid, anchors) = compute_anchors(&g, &d, dict).map_err(|e| e.to_string())?;
    let document = serialize_hybrid(&hybrid, &anchors);
    let (hybrid, anchors) = parse_hybrid(&document, dict).map_err(|e| e.to_string())?;
    let rebuilt = reconstruct(&hybrid, &anchors, dict).map_err(|e| e.to_string())?;
    let got = canonical_smiles(&rebuilt.graph).map_err(|e| e.to_string())?;
    if got != expected {
        return Err(format!("{expected} came back as {got}"));
    }
    Ok(d.groups.into_iter().map(|g| g.name).collect())
}

fn criterion_round_trip() -> Check {
    let start = Instant::now();
    let dict = Dictionary::shipped();
    let selected: Vec<String> = corpus()
        .into_iter()
        .filter(|s| (5..=40).contains(&mol(s).heavy_atom_count()))
        .collect();
    let results = par_map(&selected, |s| round_trip(s, &dict));
    let elapsed = start.elapsed();
    let mut covered = BTreeSet::new();
    let mut failures = Vec::new();
    for (s, r) in selected.iter().zip(results) {
        match r {
            Ok(groups) => covered.extend(groups),
            Err(e) => failures.push(format!("{s}: {e}")),
        }
    }
    let summary = format!(
        "{}/{} molecules, {}/{} groups covered, {:.1}s",
        selected.len() - failures.len(),
        selected.len(),
        covered.len(),
        dict.len(),
        elapsed.as_secs_f64()
    );
    if selected.len() >= 300 && covered.len() >= 40 && failures.is_empty() && elapsed < Duration::from_secs(60) {
        Ok(summary)
    } else {
        Err(format!("{summary}; first failures: {:?}", &failures[..failures.len().min(3)]))
    }
}

fn criterion_l1_fidelity() -> Check {
    let set = read_smiles("data/small50.smi");
    let graphs: Vec<MolecularGraph> = set.iter().map(|s| mol(s)).collect();
    if set.len() != 50 || graphs.iter().any(|g| g.heavy_atom_count() > 12) {
        return Err("fixture must hold 50 molecules of at most 12 heavy atoms".into());
    }
    let pairs: Vec<(usize, usize)> = (0..50).flat_map(|i| (i..50).map(move |j| (i, j))).collect();
    let verdicts = par_map(&pairs, |&(i, j)| {
        let score = l1_score(&set[i], &set[j]).map(|s| s.score).map_err(|e| e.to_string());
        (score, isomorphic(&graphs[i], &graphs[j]))
    });
    let mut disagreements = Vec::new();
    let mut positives = 0;
    for (&(i, j), (score, iso)) in pairs.iter().zip(verdicts) {
        let score = score?;
        if score != 0 && score != 100 {
            return Err(format!("score {score} for {} / {}", set[i], set[j]));
        }
        if iso {
            positives += 1;
        }
        if (score == 100) != iso {
            disagreements.push(format!("{} / {}", set[i], set[j]));
        }
    }
    let summary = format!(
        "{} pairs, {} isomorphic, {} disagreements",
        pairs.len(),
        positives,
        disagreements.len()
    );
    if disagreements.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {:?}", &disagreements[..disagreements.len().min(5)]))
    }
}

fn ring_distances(t: &FunctionalGroupTemplate) -> Vec<Vec<usize>> {
    let n = t.core_len;
    let mut adj = vec![Vec::new(); n];
    for b in t.bonds.iter().filter(|b| b.a < n && b.b < n) {
        adj[b.a].push(b.b);
        adj[b.b].push(b.a);
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

fn cos(a: Point, b: Point) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

/// Best total cosine over every injective anchor-to-candidate map.
fn brute_force_best(dirs: &[Point], t: &FunctionalGroupTemplate) -> f64 {
    let n = t.direction_vectors.len();
    let mut best = f64::NEG_INFINITY;
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            best = best.max(cos(dirs[0], t.direction_vectors[a]) + cos(dirs[1], t.direction_vectors[b]));
        }
    }
    best
}

fn bounding_box(points: &[Point]) -> BBox {
    let x1 = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let y1 = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let x2 = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let y2 = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    BBox::new(x1, y1, x2, y2).expect("box inside the frame")
}

fn rotated_graph(g: &MolecularGraph, angle: f64) -> MolecularGraph {
    let mut out = g.clone();
    for i in 0..g.atom_count() {
        let p = g.atom(i).coord_2d.expect("coordinates");
        out.set_coord(i, p.rotated(angle));
    }
    out
}

fn criterion_dvm_rotations() -> Check {
    let dict = Dictionary::shipped();
    let t = dict.get("Aryl").ok_or("no Aryl group")?;
    let dist = ring_distances(t);
    let candidates = &t.attachment_candidates;
    let center = Point::new(500.0, 500.0);
    let mut failures = Vec::new();
    let mut collisions = 0;
    for (name, want) in [("para", 3), ("meta", 2), ("ortho", 1)] {
        let second = (1..candidates.len())
            .find(|&k| dist[candidates[0]][candidates[k]] == want)
            .ok_or("template lacks the substitution pattern")?;
        for deg in 0..360 {
            let angle = f64::from(deg).to_radians();
            let drawn: Vec<Point> = t
                .canonical_coords
                .iter()
                .map(|&p| center + p.rotated(angle) * 150.0)
                .collect();
            let bbox = bounding_box(&drawn);
            let anchors = [drawn[candidates[0]], drawn[candidates[second]]];
            let dirs: Vec<Point> = anchors
                .iter()
                .map(|&a| anchor_direction(a, bbox).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let assignment = match_anchors(&dirs, t).map_err(|e| e.to_string())?;
            let slots = assignment.slots();
            if assignment.argmax_differs {
                collisions += 1;
            }
            let ok = slots.len() == 2
                && slots[0] != slots[1]
                && dist[candidates[slots[0]]][candidates[slots[1]]] == want
                && (assignment.total_cosine() - brute_force_best(&dirs, t)).abs() < 1e-9;
            if !ok {
                failures.push(format!("{name} at {deg} deg: slots {slots:?}"));
            }
        }
    }

    // The same rotations through the whole pipeline, with distinguishable substituents.
    let isomers = ["Cc1ccc(CC)cc1", "Cc1cccc(CC)c1", "Cc1ccccc1CC"];
    let work: Vec<(usize, u32)> = (0..3).flat_map(|k| (0..360).map(move |d| (k, d))).collect();
    let laid: Vec<MolecularGraph> = isomers.iter().map(|s| generate_2d_coords(&mol(s)).graph).collect();
    let expected: Vec<String> = isomers.iter().map(|s| canonical_smiles(&mol(s)).unwrap()).collect();
    let pipeline = par_map(&work, |&(k, deg)| {
        let g = rotated_graph(&laid[k], f64::from(deg).to_radians());
        let d = decompose(&g, &dict).map_err(|e| e.to_string())?;
        let (h, a) = compute_anchors(&g, &d, &dict).map_err(|e| e.to_string())?;
        let r = reconstruct(&h, &a, &dict).map_err(|e| e.to_string())?;
        canonical_smiles(&r.graph).map_err(|e| e.to_string())
    });
    for (&(k, deg), got) in work.iter().zip(pipeline) {
        if got.as_deref() != Ok(expected[k].as_str()) {
            failures.push(format!("{} at {deg} deg gave {got:?}", isomers[k]));
        }
    }
    let summary = format!(
        "3 x 360 matchings ({collisions} resolved past per-anchor argmax), 3 x 360 reconstructions, {} wrong",
        failures.len()
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {:?}", &failures[..failures.len().min(5)]))
    }
}

/// Carbons carrying =O and -OH with no other heteroatom neighbours.
fn carboxyl_carbons(g: &MolecularGraph) -> Vec<usize> {
    let adj = g.adjacency();
    (0..g.atom_count())
        .filter(|&c| g.atom(c).element == Element::C && g.atom(c).formal_charge == 0)
        .filter(|&c| {
            let mut carbonyl = 0;
            let mut hydroxyl = 0;
            for &(n, b) in &adj[c] {
                let o = g.atom(n);
                if o.element != Element::O || o.formal_charge != 0 || g.degree(n) != 1 {
                    continue;
                }
                match g.bonds()[b].order.valence() {
                    2 => carbonyl += 1,
                    1 if o.total_h() == 1 => hydroxyl += 1,
                    _ => {}
                }
            }
            let hetero = adj[c].iter().filter(|&&(n, _)| g.atom(n).element != Element::C).count();
            carbonyl == 1 && hydroxyl == 1 && hetero == 2
        })
        .collect()
}

fn criterion_exclusivity() -> Check {
    let dict = Dictionary::shipped();
    let molecules = corpus();
    let results = par_map(&molecules, |s| -> Result<(usize, usize), String> {
        let g = mol(s);
        let n = g.atom_count();
        let d = decompose(&g, &dict).map_err(|e| format!("{s}: {e}"))?;
        let mut seen = vec![0u32; n];
        for a in d.groups.iter().flat_map(|g| &g.atoms).chain(&d.residual) {
            seen[*a] += 1;
        }
        if seen.iter().any(|&c| c != 1) {
            return Err(format!("{s}: atoms not partitioned"));
        }
        let acids: HashSet<usize> = d
            .groups
            .iter()
            .filter(|g| g.name == "Carboxylic Acid")
            .flat_map(|g| g.atoms.iter().copied())
            .collect();
        for grp in d.groups.iter().filter(|g| g.name == "Ketone/Carbonyl" || g.name == "Carbonyl") {
            if grp.atoms.iter().any(|a| acids.contains(a)) {
                return Err(format!("{s}: {} overlaps a Carboxylic Acid", grp.name));
            }
        }
        let expected = carboxyl_carbons(&g);
        for &c in &expected {
            if !acids.contains(&c) {
                return Err(format!("{s}: carboxyl carbon {c} not in a Carboxylic Acid group"));
            }
        }
        Ok((1, expected.len()))
    });
    let mut checked = 0;
    let mut acids = 0;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((m, a)) => {
                checked += m;
                acids += a;
            }
            Err(e) => failures.push(e),
        }
    }
    let summary = format!("{checked}/{} molecules partitioned, {acids} carboxyl groups kept whole", molecules.len());
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {:?}", &failures[..failures.len().min(5)]))
    }
}

/// Generated samples plus the number of molecule samples skipped because
/// their 2D layout overlaps; any other failure is an error.
fn generate_into(dir: &Path, sources: &SourceSet, config: &GenerateConfig) -> Result<(Vec<DatasetSample>, usize), String> {
    let dict = Dictionary::shipped();
    let jobs = plan(sources, config).map_err(|e| e.to_string())?;
    let generator = Generator::new(sources, &dict);
    let results = par_map(&jobs, |j| generator.run(j));
    write_dataset(dir, sources, config, &jobs, &results).map_err(|e| e.to_string())?;
    let mut samples = Vec::with_capacity(results.len());
    let mut overlapping = 0;
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(s) => samples.push(s),
            Err(DatagenError::Layout(_)) if job.kind == SampleKind::Molecule => overlapping += 1,
            Err(e) => return Err(format!("sample {} failed: {e}", job.index)),
        }
    }
    Ok((samples, overlapping))
}

fn files_under(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("listing") {
            let p = e.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).expect("prefix").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_generator() -> Check {
    let start = Instant::now();
    let mut sources = parse_source(&std::fs::read_to_string(data_path("data/reactions.txt")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let molecules: Vec<String> = corpus()
        .into_iter()
        .filter(|s| (5..=40).contains(&mol(s).heavy_atom_count()))
        .step_by(2)
        .collect();
    sources.molecules = molecules;
    let config = GenerateConfig {
        count: 10_000,
        molecules: Some(sources.molecules.len()),
        seed: 20_240_601,
        ..GenerateConfig::default()
    };
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (samples, overlapping) = generate_into(first.path(), &sources, &config)?;

    let mut counts = HashMap::new();
    for s in &samples {
        if let Some(a) = s.provenance.archetype {
            *counts.entry(a.name()).or_insert(0usize) += 1;
        }
    }
    let mut problems = Vec::new();
    for (name, target) in [("Linear", 7000.0), ("MultiLine", 1500.0), ("TreeGraph", 1500.0)] {
        let got = counts.get(name).copied().unwrap_or(0) as f64;
        if (got - target).abs() > 0.02 * target {
            problems.push(format!("{name} {got} vs {target}"));
        }
    }
    let mut anchors = 0;
    for s in &samples {
        for a in s.annotations.iter().filter(|a| a.keypoint.is_some()) {
            anchors += 1;
            let inside = a
                .parent
                .and_then(|p| s.annotations.get(p))
                .is_some_and(|p| p.category == chemanchor::coco::Category::FunctionalGroup && p.bbox.contains(a.keypoint.unwrap(), 0.0));
            if !inside {
                problems.push(format!("anchor outside its group box in {}", s.image.file_name));
            }
        }
    }

    generate_into(second.path(), &sources, &config)?;
    let files = files_under(first.path());
    if files != files_under(second.path()) {
        problems.push("reruns wrote different file sets".into());
    }
    let differing = files
        .iter()
        .filter(|f| std::fs::read(first.path().join(f)).ok() != std::fs::read(second.path().join(f)).ok())
        .count();
    if differing > 0 {
        problems.push(format!("{differing} files differ between reruns"));
    }
    let summary = format!(
        "Linear/MultiLine/TreeGraph = {}/{}/{}, {} molecule samples ({} skipped for overlapping layouts), {} anchors checked, {} files identical across reruns, {:.1}s",
        counts.get("Linear").unwrap_or(&0),
        counts.get("MultiLine").unwrap_or(&0),
        counts.get("TreeGraph").unwrap_or(&0),
        sources.molecules.len() - overlapping,
        overlapping,
        anchors,
        files.len(),
        start.elapsed().as_secs_f64()
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {:?}", &problems[..problems.len().min(5)]))
    }
}

fn criterion_activation() -> Check {
    let resolver = Resolver::offline();
    let (reagents, solvents) = split_conditions("Pd(OAc)2, PPh3, TBAB / Toluene, H2O", &SolventLexicon::default());
    let record = ReactionRecord {
        reaction_id: 1,
        reactants: vec!["COC(=O)c1ccc(-c2ccc(Br)cc2)cc1".into(), "OB(O)c1ccccc1".into()],
        products: vec!["COC(=O)c1ccc(-c2ccc(-c3ccccc3)cc2)cc1".into()],
        reagents,
        solvents,
        unrecognized: Vec::new(),
    };
    let mut names = HashMap::new();
    for s in record.reactants.iter().chain(&record.products) {
        names.insert(s.clone(), resolver.resolve(s).map_err(|e| e.to_string())?);
    }
    let block = build_reaction_context(&record, &names);
    if block != SUZUKI_BLOCK {
        return Err(format!("context block differs: {block}"));
    }
    let boronic = resolver.resolve("OB(O)c1ccccc1").map_err(|e| e.to_string())?;
    let prompt = build_prompt(&boronic, "OB(O)c1ccccc1", "Analyze...");
    if prompt != BORONIC_PROMPT {
        return Err(format!("prompt differs: {prompt}"));
    }
    Ok(format!("context block ({} bytes) and prompt ({} bytes) identical", block.len(), prompt.len()))
}

fn criterion_canonical() -> Check {
    let molecules = corpus();
    let mut by_size: Vec<&String> = molecules.iter().collect();
    by_size.sort_by_key(|s| std::cmp::Reverse(mol(s).atom_count()));
    let picked: Vec<&String> = by_size.iter().step_by(by_size.len() / 100).take(100).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut work = Vec::new();
    for s in &picked {
        let n = mol(s).atom_count();
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            work.push((*s, order));
        }
    }
    let permuted = par_map(&work, |(s, order)| {
        let g = mol(s);
        (canonical_smiles(&g).unwrap(), canonical_smiles(&g.permuted(order)).unwrap())
    });
    let mismatched: Vec<String> = permuted
        .iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| format!("{a} vs {b}"))
        .collect();
    let not_idempotent: Vec<String> = par_map(&molecules, |s| {
        let once = canonical_smiles(&mol(s)).unwrap();
        let twice = canonical_smiles(&mol(&once)).unwrap();
        (once != twice).then(|| format!("{once} -> {twice}"))
    })
    .into_iter()
    .flatten()
    .collect();
    let summary = format!(
        "{} permutations over {} molecules, {} mismatched; idempotent on {}/{}",
        work.len(),
        picked.len(),
        mismatched.len(),
        molecules.len() - not_idempotent.len(),
        molecules.len()
    );
    if picked.len() == 100 && mismatched.is_empty() && not_idempotent.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {:?} {:?}", mismatched.first(), not_idempotent.first()))
    }
}

fn criterion_layout() -> Check {
    let text = std::fs::read_to_string(data_path("fixtures/fgsft_example.json")).map_err(|e| e.to_string())?;
    let dataset: CocoDataset = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let width = f64::from(dataset.images[0].width);
    let elements = elements_from_coco(&dataset, 0).map_err(|e| e.to_string())?;
    let layout = parse_layout(&elements);
    if layout.reactions.len() != 1 {
        return Err(format!("{} reactions", layout.reactions.len()));
    }
    let r = &layout.reactions[0];
    let counts = [
        (Role::Reactant, 2),
        (Role::Product, 2),
        (Role::Arrow, 1),
        (Role::Plus, 1),
        (Role::Condition, 0),
    ];
    for (role, want) in counts {
        if r.role(role).len() != want {
            return Err(format!("{} {}, expected {want}", r.role(role).len(), role.name()));
        }
    }
    let pixel_x = |i: usize| layout.elements[i].bbox.x1 * width / 1000.0;
    let reactant_x: Vec<f64> = r.reactants.iter().map(|&i| pixel_x(i)).collect();
    if (reactant_x[0] - 9.84).abs() > 0.05 || (reactant_x[1] - 154.04).abs() > 0.05 {
        return Err(format!("reactants at x = {reactant_x:?}"));
    }
    let product_x: Vec<f64> = r.products.iter().map(|&i| pixel_x(i)).collect();
    if product_x[0] >= product_x[1] {
        return Err(format!("products at x = {product_x:?}"));
    }

    // Same answer however the annotations are ordered in the file.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let describe = |l: &chemanchor::reaction::Layout| -> Vec<(Role, Vec<String>)> {
        let r = &l.reactions[0];
        [Role::Reactant, Role::Product, Role::Arrow, Role::Plus]
            .into_iter()
            .map(|role| {
                let boxes = r.role(role).iter().map(|&i| format!("{:.3}", l.elements[i].bbox.x1)).collect();
                (role, boxes)
            })
            .collect()
    };
    let reference = describe(&layout);
    for _ in 0..20 {
        let mut shuffled = dataset.clone();
        shuffled.annotations.shuffle(&mut rng);
        let again = parse_layout(&elements_from_coco(&shuffled, 0).map_err(|e| e.to_string())?);
        if again.reactions.len() != 1 || describe(&again) != reference {
            return Err("ordering depends on annotation order".into());
        }
    }
    Ok(format!(
        "1 reaction: reactants at x = {:.1}, {:.1}; products at x = {:.1}, {:.1}; 1 arrow, 1 plus",
        reactant_x[0], reactant_x[1], product_x[0], product_x[1]
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("decompose/reconstruct round trip", criterion_round_trip),
        ("L1 score vs isomorphism oracle", criterion_l1_fidelity),
        ("phenylene anchor matching under rotation", criterion_dvm_rotations),
        ("decomposition exclusivity", criterion_exclusivity),
        ("dataset generator mix, anchors, reruns", criterion_generator),
        ("offline activation block and prompt", criterion_activation),
        ("canonical SMILES permutation invariance", criterion_canonical),
        ("reaction layout parsing", criterion_layout),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.1}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {detail} [{secs:.1}s]", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
