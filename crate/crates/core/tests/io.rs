use std::path::PathBuf;

use clap::Parser;
use proptest::prelude::*;

use quasiammann::ammann::*;
use quasiammann::cli::{self, Cli, Q0Arg};
use quasiammann::dual::*;
use quasiammann::exactfield::{rat, QuadNum};
use quasiammann::io::*;
use quasiammann::quasilattice1d::RowId;
use quasiammann::Error;

fn small(sym: Symmetry, row: RowId, seed: u64, r: i64) -> (AmmannPattern, Tiling) {
    let w = Window::new(rat(r, 1));
    let p = generic_pattern(sym, row, seed, &w).unwrap().0;
    let t = dualize(&p, &w).unwrap();
    (p, t)
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("tiling-{}.json", name))
}

#[test]
fn empty_tiling_serializes_with_empty_arrays() {
    let (_, mut t) = small(Symmetry::Ten, RowId::R1, 0, 3);
    t.vertices.clear();
    t.faces.clear();
    let doc = TilingDoc::from_tiling(&t);
    let json = doc.to_json();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["vertices", "faces", "classes"] {
        assert_eq!(v[key].as_array().unwrap().len(), 0);
    }
    assert_eq!(v["meta"]["D"], 5);
    assert_eq!(TilingDoc::from_json(&json).unwrap(), doc);
}

#[test]
fn exact_coordinates_round_trip() {
    for (sym, row, _) in minimal_2d_cases() {
        let (_, t) = small(sym, row, 3, 4);
        let doc = TilingDoc::from_tiling(&t);
        let back = TilingDoc::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let pos = back.positions().unwrap();
        assert_eq!(pos.len(), t.vertices.len());
        for (p, v) in pos.iter().zip(&t.vertices) {
            assert_eq!(*p, v.pos);
        }
        assert_eq!(back.faces.len(), t.faces.len());
        assert!(back.faces.iter().zip(&t.faces).all(|(a, b)| a.cells == b.vertices));
    }
}

#[test]
fn class_table_round_trips() {
    let (p, _) = small(Symmetry::Ten, RowId::R1, 1, 4);
    let w = window_for_edges(&p, 4).unwrap();
    let r = prototiles(&p, &w, &Options::default()).unwrap();
    let doc = TilingDoc::from_report(&r);
    let back = TilingDoc::from_json(&doc.to_json()).unwrap();
    assert_eq!(back.classes.len(), r.classes.len());
    let decs = back.decorations().unwrap();
    for (d, c) in decs.iter().zip(&r.classes) {
        assert_eq!(*d, c.decoration);
    }
    assert!(back.faces.iter().zip(&r.face_class).all(|(f, &c)| f.class_id == Some(c)));
}

#[test]
fn serialization_is_deterministic() {
    let a = small(Symmetry::Eight, RowId::R2b, 5, 4).1;
    let b = small(Symmetry::Eight, RowId::R2b, 5, 4).1;
    assert_eq!(TilingDoc::from_tiling(&a).to_json(), TilingDoc::from_tiling(&b).to_json());
    let style = Style::default();
    assert_eq!(tiling_svg(&a, None, None, &style), tiling_svg(&b, None, None, &style));
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(matches!(TilingDoc::from_json("{}"), Err(Error::Invalid(_))));
    let (_, t) = small(Symmetry::Ten, RowId::R1, 0, 3);
    let mut doc = TilingDoc::from_tiling(&t);
    doc.faces[0].cells[0] = doc.vertices.len();
    assert!(TilingDoc::from_json(&doc.to_json()).is_err());
    assert!(parse_pair(&["1/0".into(), "0".into()], 5).is_err());
}

#[test]
fn golden_fixtures_are_byte_stable() {
    let update = std::env::var_os("UPDATE_FIXTURES").is_some();
    for (sym, row, name) in minimal_2d_cases() {
        let json = fixture_document(sym, row).unwrap().to_json();
        let path = fixture_path(name);
        if update {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &json).unwrap();
        }
        let frozen = std::fs::read_to_string(&path).unwrap();
        assert!(frozen == json, "fixture {} changed", name);
        let doc = TilingDoc::from_json(&frozen).unwrap();
        assert!(!doc.faces.is_empty());
        assert_eq!(doc.meta.symmetry, sym.to_string());
        assert_eq!(doc.meta.row, row.to_string());
    }
}

#[test]
fn svg_layers_come_in_order() {
    let (p, t) = small(Symmetry::Eight, RowId::R2a, 2, 4);
    let segs = decoration_segments(&t, &p).unwrap();
    let (pieces, _) = inflation_pieces(&t, &p).unwrap();
    let flat: Vec<Vec<Point>> = pieces.into_iter().flatten().flatten().collect();
    let svg = tiling_svg(&t, Some(&segs), Some(&flat), &Style::default());
    let at = |id: &str| svg.find(&format!("<g id=\"{}\"", id)).unwrap();
    assert!(at("tiling") < at("decoration") && at("decoration") < at("inflation"));
    assert!(svg.contains("stroke=\"#6a1b9a\""));
    assert_eq!(svg.matches("<path").count(), t.faces.len() + segs.iter().map(|s| s.len()).sum::<usize>() + flat.len());
    let widths: Vec<f64> = svg
        .match_indices("stroke-width=\"")
        .map(|(i, m)| svg[i + m.len()..].split('"').next().unwrap().parse().unwrap())
        .collect();
    assert!(widths[0] > widths[1] && widths[0] > widths[2]);
}

#[test]
fn pattern_svg_clips_to_the_box() {
    let (p, _) = small(Symmetry::Ten, RowId::R1, 42, 3);
    let clip = [-6.0, 6.0, -4.0, 4.0];
    let svg = pattern_svg(&p, &clip, &Style::default()).unwrap();
    let lines = svg.split("<g id=\"window\"").next().unwrap();
    for path in lines.split("<path d=\"").skip(1) {
        let d = path.split('"').next().unwrap();
        let nums: Vec<f64> = d.split(|c: char| c == 'M' || c == 'L' || c == ' ').filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect();
        for xy in nums.chunks(2) {
            assert!(xy[0].abs() <= 6.0001 && xy[1].abs() <= 4.0001);
        }
    }
    let h4 = build_pattern(&AmmannSpec::new(Symmetry::H4, RowId::R1, None).unwrap());
    assert!(h4.is_err() || pattern_svg(&h4.unwrap(), &clip, &Style::default()).is_err());
}

#[test]
fn plane_lists_round_trip_in_four_dimensions() {
    let w = Window::new(rat(2, 1));
    let (p, _) = generic_pattern(Symmetry::H4, RowId::R1, 0, &w).unwrap();
    let doc = PatternDoc::new(&p, &w).unwrap();
    assert_eq!(doc.directions.len(), p.star.len());
    assert!(doc.directions.iter().all(|a| a.len() == p.projection.ambient_dim()));
    let back = PatternDoc::from_json(&doc.to_json()).unwrap();
    assert_eq!(back, doc);
    let planes = p.planes_in_window(&w).unwrap();
    assert_eq!(back.planes.len(), planes.len());
    for (d, g) in back.planes.iter().zip(&planes) {
        assert_eq!(parse_pair(&d.offset, 5).unwrap(), g.offset);
    }
}

#[test]
fn window_and_origin_flags_parse() {
    let w = cli::parse_window("-10:10:-10:10").unwrap();
    assert_eq!(w.clip, [-10.0, 10.0, -10.0, 10.0]);
    let r = w.disk.radius.clone();
    assert!(&r * &r >= rat(200, 1) && r < rat(14143, 1000) + rat(1, 1000));
    assert_eq!(cli::parse_window("7/2").unwrap().disk.radius, rat(7, 2));
    for bad in ["", "0", "-1", "1:2:3", "3:1:0:1", "a:b:c:d"] {
        assert!(cli::parse_window(bad).is_err(), "{}", bad);
    }
    assert_eq!(cli::parse_q0("random:42").unwrap(), Q0Arg::Random(42));
    assert_eq!(cli::parse_q0("1/3,-2,0.5").unwrap(), Q0Arg::Exact(vec![rat(1, 3), rat(-2, 1), rat(1, 2)]));
    assert!(cli::parse_q0("random:x").is_err());
    assert!(cli::parse_q0("1/3,y").is_err());
}

fn run(args: &[&str]) -> Result<String, Error> {
    let cli = Cli::try_parse_from(std::iter::once("quasiammann").chain(args.iter().copied())).unwrap();
    let mut out = Vec::new();
    cli::run(cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

#[test]
fn commands_dispatch_and_report() {
    assert!(run(&["spacegroup", "--group", "h4"]).unwrap().contains("1 space group (symmorphic)"));
    let trace = run(&["spacegroup", "--group", "h4", "--trace"]).unwrap();
    assert!(trace.contains("0 ≡ Φ1(b1)+2Φ1(b2)"));
    assert!(run(&["spacegroup", "--group", "i2:8"]).unwrap().contains("2 space groups"));
    let pairs = run(&["pairs", "--max", "12"]).unwrap();
    assert!(pairs.contains("I2(5) <-> A4") && pairs.contains("I2(9) <-> none"));
    assert!(run(&["roots", "--system", "E8"]).unwrap().contains("240 roots"));
    let wall = run(&["wallcheck", "--symmetry", "8", "--row", "2b", "--window", "6"]).unwrap();
    assert!(wall.contains("wall-to-wall true"));
}

#[test]
fn invalid_combinations_get_validation_codes() {
    for args in [
        vec!["dualize", "--symmetry", "h4"],
        vec!["prototiles", "--symmetry", "h3"],
        vec!["ammann", "--symmetry", "8", "--row", "1"],
        vec!["ammann", "--symmetry", "9"],
        vec!["ammann", "--window", "1:2"],
        vec!["ammann", "--q0", "1,2"],
        vec!["spacegroup", "--group", "e8"],
        vec!["roots", "--system", "Q7"],
    ] {
        let e = run(&args).unwrap_err();
        assert_eq!(cli::exit_code(&e), cli::EXIT_VALIDATION, "{:?}: {}", args, e);
    }
    assert_eq!(cli::exit_code(&Error::Computation("x".into())), cli::EXIT_COMPUTATION);
    assert_eq!(cli::exit_code(&Error::SingularPhase { n: 0 }), cli::EXIT_COMPUTATION);
    assert_eq!(cli::exit_code(&Error::Io(std::io::Error::other("x"))), cli::EXIT_IO);
}

#[test]
fn files_land_in_the_output_directory() {
    let dir = std::env::temp_dir().join(format!("quasiammann-io-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    run(&["--out-dir", d, "ammann", "--symmetry", "10", "--window", "-4:4:-3:3", "--q0", "random:42", "--out", "p.svg"]).unwrap();
    let svg = std::fs::read_to_string(dir.join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<g id=\"lines\""));
    run(&["--out-dir", d, "dualize", "--symmetry", "8", "--row", "2a", "--window", "3", "--decorate", "both", "--out", "octa"]).unwrap();
    for f in ["octa.json", "octa-ammann.svg", "octa-inflation.svg"] {
        assert!(dir.join(f).exists(), "{}", f);
    }
    let doc = TilingDoc::from_json(&std::fs::read_to_string(dir.join("octa.json")).unwrap()).unwrap();
    assert!(doc.faces.iter().all(|f| f.class_id.is_some()));
    assert!(!doc.classes.is_empty());
    run(&["--out-dir", d, "ammann", "--symmetry", "h3", "--window", "2", "--format", "json", "--out", "h3.json"]).unwrap();
    let planes = PatternDoc::from_json(&std::fs::read_to_string(dir.join("h3.json")).unwrap()).unwrap();
    assert_eq!(planes.meta.symmetry, "h3");
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_numbers_round_trip(p in -10_000i64..10_000, q in -10_000i64..10_000, den in 1i64..5_000, d in prop::sample::select(vec![2u32, 3, 5])) {
        let x = QuadNum::from_ints(p, q, den, d);
        prop_assert_eq!(parse_pair(&quad_pair(&x), d).unwrap(), x);
    }
}
