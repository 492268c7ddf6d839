mod common;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use medleak::capture::{parse_capture, split_by_device};
use medleak::classify::{chi_squared, compare_methods, shannon_entropy, ClassifierConfig};
use medleak::corpus::{build_fixture_capture, encrypted_item, fixture_registry, generate_corpus, CorpusSpec, Scenario};
use medleak::leak::{FindingCategory, LeakRules};
use medleak::metadata::{activity_periods, HostMap};
use medleak::payload::extract_payloads;
use medleak::report::{analyze, analyze_stream, NamedCapture, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const BIN: &str = env!("CARGO_BIN_EXE_medleak");

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn classifier_ordering() -> Outcome {
    let t0 = Instant::now();
    let corpus = generate_corpus(&CorpusSpec {
        seed: 2017,
        ..CorpusSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let r = compare_methods(
        corpus.iter().map(|i| (i.bytes.as_slice(), i.label)),
        &ClassifierConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed().as_secs_f64();
    let p = |s: &medleak::classify::MethodStats| s.precision.unwrap_or(0.0);
    let (pa, pe, pc) = (p(&r.ascii), p(&r.entropy), p(&r.chi_squared));
    let (fa, fe, fc) = (
        r.ascii.fraction_flagged_cleartext,
        r.entropy.fraction_flagged_cleartext,
        r.chi_squared.fraction_flagged_cleartext,
    );
    let detail = format!(
        "items={} precision ascii={pa:.4} entropy={pe:.4} chi={pc:.4}; flagged ascii={fa:.4} entropy={fe:.4} chi={fc:.4}; {elapsed:.2}s",
        r.items
    );
    check(
        r.items == 10_000 && pa == 1.0 && pc >= 0.95 && pe < pc && fe > fa && fe > fc && elapsed < 10.0,
        detail,
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(513);
    let mut worst_h = 0f64;
    let mut worst_chi = 0f64;
    for _ in 0..1000 {
        let len = rng.random_range(1..=4096);
        let mut bytes = vec![0u8; len];
        // Mix skewed and uniform payloads so both ends of each statistic are exercised.
        let alphabet = rng.random_range(1..=256u32);
        for b in bytes.iter_mut() {
            *b = rng.random_range(0..alphabet) as u8;
        }
        let h = shannon_entropy(&bytes).map_err(|e| e.to_string())?;
        let c = chi_squared(&bytes).map_err(|e| e.to_string())?;
        worst_h = worst_h.max((h - common::oracle_entropy(&bytes)).abs());
        worst_chi = worst_chi.max((c - common::oracle_chi_squared(&bytes)).abs());
    }
    check(
        worst_h <= 1e-9 && worst_chi <= 1e-9,
        format!("1000 payloads; max |dH|={worst_h:e} max |dchi2|={worst_chi:e}"),
    )
}

fn analytic_anchors() -> Outcome {
    let all: Vec<u8> = (0..=255).collect();
    let same = vec![0x41u8; 256];
    let got = [
        shannon_entropy(b"AAAA").unwrap(),
        shannon_entropy(&all).unwrap(),
        chi_squared(&all).unwrap(),
        chi_squared(&same).unwrap(),
    ];
    // Expected values from the formulas: 255 empty bins each contribute e=1,
    // and the full bin contributes (256-1)^2/1.
    let want = [0.0, 8.0, 0.0, 255.0 + 255.0 * 255.0];
    let ok = got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12);
    check(ok, format!("got {got:?} want {want:?}"))
}

fn run_cli(dir: &Path, scenario: &str) -> Result<(i32, Vec<u8>), String> {
    let pcap = dir.join(format!("{scenario}.pcap"));
    let reg = dir.join(format!("{scenario}.toml"));
    let gen = Command::new(BIN)
        .args(["gen-fixture", scenario, "--out"])
        .arg(&pcap)
        .arg("--registry-out")
        .arg(&reg)
        .status()
        .map_err(|e| e.to_string())?;
    if !gen.success() {
        return Err(format!("gen-fixture {scenario} failed"));
    }
    let out = Command::new(BIN)
        .arg("analyze")
        .arg("--capture")
        .arg(&pcap)
        .arg("--registry")
        .arg(&reg)
        .env_remove("MEDLEAK_DICT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn fixture_end_to_end(dir: &Path) -> Outcome {
    let bp = Scenario::BpMonitorLeaky;
    let cfg = RunConfig {
        registry: fixture_registry(bp),
        ..RunConfig::default()
    };
    let cap = NamedCapture {
        name: "bp.pcap".into(),
        bytes: build_fixture_capture(bp),
    };
    let a = analyze(&[cap], &cfg, None).map_err(|e| e.to_string())?;
    let f: Vec<_> = a.devices.iter().flat_map(|d| &d.findings).collect();
    let has = |cat: FindingCategory, text: &str| {
        f.iter()
            .any(|x| x.category == cat && x.matched_text.to_ascii_lowercase().contains(text))
    };
    let bp_ok = has(FindingCategory::DictionaryMedical, "blood_pressure")
        && has(FindingCategory::VendorIdentifier, "withings")
        && has(FindingCategory::UserIdentifier, "current_user")
        && f.iter().any(|x| x.category == FindingCategory::ImageGetSignature);

    let sc = Scenario::ScaleEncrypted;
    let cfg = RunConfig {
        registry: fixture_registry(sc),
        ..RunConfig::default()
    };
    let cap = NamedCapture {
        name: "scale.pcap".into(),
        bytes: build_fixture_capture(sc),
    };
    let a = analyze(&[cap], &cfg, None).map_err(|e| e.to_string())?;
    let scale_findings: usize = a.devices.iter().map(|d| d.findings.len()).sum();
    let scale_tls = a
        .devices
        .iter()
        .all(|d| d.payload_count > 0 && d.tls_count == d.payload_count);

    let (bp_code, _) = run_cli(dir, "bp-monitor-leaky")?;
    let (scale_code, _) = run_cli(dir, "scale-encrypted")?;
    check(
        bp_ok && scale_findings == 0 && scale_tls && bp_code == 2 && scale_code == 0,
        format!(
            "bp: {} findings, four categories={bp_ok}, exit {bp_code}; scale: {scale_findings} findings, all TLS={scale_tls}, exit {scale_code}",
            f.len()
        ),
    )
}

fn conservation() -> Outcome {
    let cfg = RunConfig {
        registry: common::registry(),
        ..RunConfig::default()
    };
    let rules = LeakRules::default();
    let mut rng = ChaCha20Rng::seed_from_u64(516);
    let (mut partition, mut period, mut coarsen, mut relocate) = (0, 0, 0, 0);
    let (mut packets, mut findings) = (0usize, 0usize);
    for _ in 0..1000 {
        let bytes = common::random_capture(&mut rng);
        let cap = parse_capture(&bytes).map_err(|e| e.to_string())?;
        packets += cap.packets.len();
        let part = split_by_device(&cap.packets, &cfg.registry);
        let mut seen = BTreeSet::new();
        let all_unique = part
            .streams
            .iter()
            .flat_map(|s| s.packets.iter().map(|p| p.index))
            .chain(part.unattributed.iter().map(|p| p.index))
            .all(|i| seen.insert(i));
        if !all_unique || seen.len() != cap.packets.len() {
            partition += 1;
        }
        let hosts = HostMap::from_packets(&cap.packets);
        let g1 = rng.random_range(0.001..600.0);
        let g2 = g1 + rng.random_range(0.0..3600.0);
        for s in &part.streams {
            let fine = activity_periods(s, g1, &hosts);
            let coarse = activity_periods(s, g2, &hosts);
            let sum = |ps: &[medleak::metadata::ActivityPeriod]| ps.iter().map(|p| p.packet_count).sum::<usize>();
            if sum(&fine) != s.len() || sum(&coarse) != s.len() {
                period += 1;
            }
            if coarse.len() > fine.len() {
                coarsen += 1;
            }
            let payloads: HashMap<usize, _> = extract_payloads(s).into_iter().map(|p| (p.packet_index, p)).collect();
            let report = analyze_stream("r", s, &hosts, &cfg, &rules);
            for f in &report.findings {
                findings += 1;
                let ok = payloads
                    .get(&f.packet_index)
                    .is_some_and(|p| common::oracle_relocates(p.bytes, &f.matched_text));
                if !ok {
                    relocate += 1;
                }
            }
        }
    }
    check(
        partition + period + coarsen + relocate == 0 && findings > 0,
        format!(
            "1000 captures, {packets} packets, {findings} findings; violations partition={partition} period={period} coarsening={coarsen} relocation={relocate}"
        ),
    )
}

fn threshold_placement() -> Outcome {
    let cfg = ClassifierConfig::default();
    let mut rng = ChaCha20Rng::seed_from_u64(517);
    let n = 10_000;
    let mut both = 0;
    for _ in 0..n {
        let item = encrypted_item(rng.random(), 1024, 4096);
        let h = shannon_entropy(&item.bytes).unwrap();
        let c = chi_squared(&item.bytes).unwrap();
        if h > cfg.entropy_threshold && c < cfg.chi_threshold {
            both += 1;
        }
    }
    let frac = both as f64 / n as f64;
    check(
        frac >= 0.999,
        format!("{both}/{n} encrypted payloads above H 7.5 and below chi2 1000 ({frac:.4})"),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let mut outputs = Vec::new();
    for scenario in ["bp-monitor-leaky", "mixed-home"] {
        let (_, a) = run_cli(dir, scenario)?;
        let (_, b) = run_cli(dir, scenario)?;
        if a.is_empty() || a != b {
            return Err(format!("{scenario}: outputs differ ({} vs {} bytes)", a.len(), b.len()));
        }
        outputs.push(format!("{scenario} {} bytes", a.len()));
    }
    Ok(format!("identical JSON: {}", outputs.join(", ")))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: [Criterion; 7] = [
        ("classifier ordering on 5000+5000 corpus", Box::new(classifier_ordering)),
        ("entropy and chi-squared match oracles", Box::new(oracle_equivalence)),
        ("analytic anchors", Box::new(analytic_anchors)),
        ("fixture end to end", Box::new(|| fixture_end_to_end(dir.path()))),
        ("conservation over 1000 captures", Box::new(conservation)),
        (
            "threshold placement on encrypted payloads",
            Box::new(threshold_placement),
        ),
        ("deterministic analyze output", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
