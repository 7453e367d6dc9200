use std::io::Write;

use adaptrial_core::adaptive::{SelectionRule, TrialDesign};
use adaptrial_core::dataset::{load_subjects, single_stage_table, two_stage_table, ArmRoles, Cohort, ColumnMapping};
use adaptrial_core::sim::{single_stage_group_size, two_stage_group_sizes, GroupSizes};
use adaptrial_core::stats::RandomSource;

#[test]
fn desk_scale_group_sizes() {
    let g = |carried, r| two_stage_group_sizes(100, 2, carried, r).unwrap();
    assert_eq!(g(1, 0.33), GroupSizes { n1: 11, n2: 33 });
    assert_eq!(g(2, 0.33), GroupSizes { n1: 11, n2: 22 });
    assert_eq!(g(1, 0.67), GroupSizes { n1: 22, n2: 17 });
    assert_eq!(g(2, 0.67), GroupSizes { n1: 22, n2: 11 });
    assert_eq!(single_stage_group_size(100, 2).unwrap(), 33);
    assert!(two_stage_group_sizes(100, 2, 1, 0.01).is_err());
}

fn write_dataset(shift: [f64; 3], per_arm: usize) -> tempfile::NamedTempFile {
    let mut rng = RandomSource::new(5, 0);
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "id,arm,y,site").unwrap();
    // Arms interleaved, plus a site column and an ignored placebo arm.
    for i in 0..per_arm {
        for (a, label) in ["ctl", "lo", "hi"].iter().enumerate() {
            writeln!(f, "{},{label},{},x", i * 4 + a, shift[a] + rng.draw_std_normal()).unwrap();
        }
        writeln!(f, "{},placebo,0,x", i * 4 + 3).unwrap();
    }
    f.flush().unwrap();
    f
}

fn roles() -> ArmRoles {
    ArmRoles { control: "ctl".into(), active: vec!["lo".into(), "hi".into()], ignore: vec!["placebo".into()] }
}

#[test]
fn file_to_tables() {
    let f = write_dataset([0.0, 0.2, 1.5], 40);
    let mapping = ColumnMapping { arm: "arm".into(), outcome: "y".into(), order: Some("id".into()) };
    let records = load_subjects(f.path(), &mapping, &roles()).unwrap();
    assert_eq!(records.len(), 120);
    let cohort = Cohort::from_records(&records, &roles()).unwrap();
    assert_eq!(cohort.m(), 2);

    let single = single_stage_table(&cohort, &[10, 20, 40], 0.025).unwrap();
    assert_eq!(single.len(), 3);
    assert!(single[2].hypotheses[1].rejected);
    assert!(single[2].global_rejected);

    let template = TrialDesign::new(2, 1, 1, 0.025, SelectionRule::FixedCount { s: 1 }).unwrap();
    let rows = two_stage_table(&cohort, &[(10, 20), (15, 25)], &template).unwrap();
    for row in &rows {
        assert_eq!(row.selected.unwrap().arms().collect::<Vec<_>>(), vec![2]);
        assert!(row.hypotheses[0].stage1_only);
        assert!(!row.hypotheses[0].rejected);
        assert_eq!(row.total2, row.n2 * 2);
    }
    assert!(rows[1].hypotheses[1].rejected);
    // The same input gives the same table.
    assert_eq!(rows, two_stage_table(&cohort, &[(10, 20), (15, 25)], &template).unwrap());
    assert!(two_stage_table(&cohort, &[(30, 20)], &template).is_err());
}

#[test]
fn undeclared_label_is_a_load_error() {
    let f = write_dataset([0.0; 3], 3);
    let mapping = ColumnMapping { arm: "arm".into(), outcome: "y".into(), order: None };
    let strict = ArmRoles::new("ctl", vec!["lo".into(), "hi".into()]);
    let err = load_subjects(f.path(), &mapping, &strict).unwrap_err().to_string();
    assert!(err.contains("row 4") && err.contains("placebo"), "{err}");
}
