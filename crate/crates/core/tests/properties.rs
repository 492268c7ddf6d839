mod common;

use std::collections::{BTreeSet, HashMap};

use medleak::capture::{parse_capture, split_by_device};
use medleak::classify::{chi_squared, classify, shannon_entropy, ClassifierConfig, Consensus};
use medleak::leak::{dictionary_match, tokenize, Dictionary, DictionaryKind, DictionarySet, LeakRules};
use medleak::metadata::{activity_periods, endpoint_profiles, HostMap};
use medleak::payload::{detect_tls, extract_payloads};
use medleak::report::{analyze_stream, RunConfig};
use medleak::vendor::VendorPatterns;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn capture_from(seed: u64) -> Vec<u8> {
    common::random_capture(&mut ChaCha20Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn partition_conserves_packets(seed in any::<u64>()) {
        let cap = parse_capture(&capture_from(seed)).unwrap();
        let part = split_by_device(&cap.packets, &common::registry());
        prop_assert_eq!(part.attributed_len() + part.unattributed.len(), cap.packets.len());
        let mut seen = BTreeSet::new();
        for s in &part.streams {
            for p in &s.packets {
                prop_assert!(p.involves(s.mac));
                prop_assert!(seen.insert(p.index));
            }
        }
        for p in &part.unattributed {
            prop_assert!(seen.insert(p.index));
        }
    }

    #[test]
    fn periods_conserve_and_coarsen(seed in any::<u64>(), g1 in 0.001f64..600.0, extra in 0.0f64..3600.0) {
        let cap = parse_capture(&capture_from(seed)).unwrap();
        let part = split_by_device(&cap.packets, &common::registry());
        let hosts = HostMap::from_packets(&cap.packets);
        for s in &part.streams {
            let fine = activity_periods(s, g1, &hosts);
            let coarse = activity_periods(s, g1 + extra, &hosts);
            prop_assert_eq!(fine.iter().map(|p| p.packet_count).sum::<usize>(), s.len());
            prop_assert_eq!(coarse.iter().map(|p| p.packet_count).sum::<usize>(), s.len());
            prop_assert!(coarse.len() <= fine.len());
            for p in &fine {
                prop_assert!(p.start <= p.end);
                prop_assert!(p.packet_count >= 1);
            }
            for w in fine.windows(2) {
                prop_assert!(w[0].end < w[1].start);
            }
        }
    }

    #[test]
    fn endpoint_counts_cover_remote_packets(seed in any::<u64>()) {
        let cap = parse_capture(&capture_from(seed)).unwrap();
        let part = split_by_device(&cap.packets, &common::registry());
        let hosts = HostMap::from_packets(&cap.packets);
        for s in &part.streams {
            let prof = endpoint_profiles(s, &hosts, &VendorPatterns::default());
            let remote = s.packets.iter().filter(|p| p.remote_addr(s.mac).is_some()).count();
            prop_assert_eq!(prof.iter().map(|p| p.packet_count).sum::<usize>(), remote);
            for p in &prof {
                if p.vendor_flag {
                    let v = VendorPatterns::default();
                    prop_assert!(p.hostname.as_deref().is_some_and(|h| v.matches_host(h)) || v.matches_address(p.address));
                }
            }
        }
    }

    #[test]
    fn findings_relocate_and_only_touch_cleartext(seed in any::<u64>()) {
        let cap = parse_capture(&capture_from(seed)).unwrap();
        let cfg = RunConfig { registry: common::registry(), ..RunConfig::default() };
        let rules = LeakRules::default();
        let part = split_by_device(&cap.packets, &cfg.registry);
        let hosts = HostMap::from_packets(&cap.packets);
        for s in &part.streams {
            let payloads: HashMap<usize, _> = extract_payloads(s).into_iter().map(|p| (p.packet_index, p)).collect();
            let report = analyze_stream("r", s, &hosts, &cfg, &rules);
            prop_assert_eq!(
                report.cleartext_count + report.tls_count + report.encrypted_count + report.indeterminate_count,
                report.payload_count
            );
            for f in &report.findings {
                let p = &payloads[&f.packet_index];
                prop_assert!(common::oracle_relocates(p.bytes, &f.matched_text), "{:?}", f);
                prop_assert!(!detect_tls(p).is_tls);
                let c = classify(p, &ClassifierConfig::default()).unwrap();
                prop_assert_eq!(c.consensus, Consensus::Cleartext);
                prop_assert!(f.context.len() <= 120);
                prop_assert!(f.matched_text.len() <= 96);
            }
            prop_assert!(report.findings.windows(2).all(|w| w[0].packet_index <= w[1].packet_index));
            let again = analyze_stream("r", s, &hosts, &cfg, &rules);
            prop_assert_eq!(&again, &report);
        }
    }

    #[test]
    fn capture_round_trip(seed in any::<u64>()) {
        let cap = parse_capture(&capture_from(seed)).unwrap();
        let again = parse_capture(&cap.to_pcap_bytes()).unwrap();
        let a: Vec<_> = cap.packets.iter().map(|p| (p.timestamp, p.frame().to_vec())).collect();
        let b: Vec<_> = again.packets.iter().map(|p| (p.timestamp, p.frame().to_vec())).collect();
        prop_assert_eq!(a, b);
        for p in &cap.packets {
            prop_assert_eq!(p.header_len() + p.payload().len() + p.trailer_len(), p.frame_len());
        }
    }

    #[test]
    fn statistics_match_oracles(bytes in prop::collection::vec(any::<u8>(), 1..4096)) {
        let h = shannon_entropy(&bytes).unwrap();
        prop_assert!((h - common::oracle_entropy(&bytes)).abs() < 1e-9);
        prop_assert!((0.0..=8.0).contains(&h));
        let chi = chi_squared(&bytes).unwrap();
        prop_assert!((chi - common::oracle_chi_squared(&bytes)).abs() < 1e-9 * chi.max(1.0));
        prop_assert!(chi >= 0.0);
    }

    #[test]
    fn tokens_are_lowercase_and_relocatable(text in "[ -~]{0,200}") {
        for t in tokenize(text.as_bytes()) {
            prop_assert!(!t.is_empty());
            prop_assert_eq!(&t, &t.to_ascii_lowercase());
            prop_assert!(common::oracle_relocates(text.as_bytes(), &t), "{}", t);
        }
    }

    #[test]
    fn dictionary_match_is_monotone(
        text in "[a-z_ =&-]{0,200}",
        extra in prop::collection::vec("[a-z]{1,8}( [a-z]{1,8})?", 0..20),
    ) {
        let tokens = tokenize(text.as_bytes());
        let base = DictionarySet::bundled();
        let grown = DictionarySet::new(
            base.iter()
                .map(|d| if d.kind() == DictionaryKind::MedicalTerms { d.extended(&extra).unwrap() } else { d.clone() })
                .collect::<Vec<Dictionary>>(),
        );
        let before: BTreeSet<_> = dictionary_match(&tokens, &base).into_iter().collect();
        let after: BTreeSet<_> = dictionary_match(&tokens, &grown).into_iter().collect();
        prop_assert!(before.is_subset(&after));
    }
}
