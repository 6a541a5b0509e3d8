use std::ffi::{CStr, CString};
use std::ptr;

use restartkit_ffi::*;

fn last_error() -> String {
    let p = rk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn qcbp_json(dir: &std::path::Path, t: u64) -> CString {
    let out = dir.join("ffi.csv");
    let text = format!(
        r#"{{"experiment":"qcbp_gaussian","seed":2,"output_path":{:?},"problem":{{"n":32,"m":16,"s":2,"sigma":1e-3}},"restart":{{"t":{t}}}}}"#,
        out.to_str().unwrap()
    );
    CString::new(text).unwrap()
}

#[test]
fn run_through_the_c_interface() {
    let dir = tempfile::tempdir().unwrap();
    let json = qcbp_json(dir.path(), 400);
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(rk_config_from_json(json.as_ptr(), &mut cfg), RkStatus::Ok);
        assert_eq!(rk_config_set_seed(cfg, 4), RkStatus::Ok);
        assert_eq!(rk_config_set_budget(cfg, 300), RkStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(rk_run(cfg, 2, &mut report), RkStatus::Ok);
        assert!(rk_report_inner_iterations(report) <= 300);
        assert!(rk_report_restarts(report) > 0);
        assert!(rk_report_final_objective(report).is_finite());

        let n = rk_report_dimension(report);
        assert_eq!(n, 32);
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        assert_eq!(rk_report_final_point(report, re.as_mut_ptr(), im.as_mut_ptr(), n), RkStatus::Ok);
        assert!(re.iter().any(|v| *v != 0.0));
        assert_eq!(rk_report_final_point(report, re.as_mut_ptr(), ptr::null_mut(), n - 1), RkStatus::Config);

        let rows = rk_report_trace_len(report);
        assert!(rows >= 2);
        let mut row = RkTraceRow::default();
        assert_eq!(rk_report_trace_row(report, 0, &mut row), RkStatus::Ok);
        assert_eq!(row.inner_iteration, 0);
        assert!(row.reconstruction_error.is_finite());
        assert!(row.objective_error.is_nan());
        let mut last = RkTraceRow::default();
        assert_eq!(rk_report_trace_row(report, rows - 1, &mut last), RkStatus::Ok);
        assert!(last.objective_value + last.feasibility_gap <= row.objective_value + row.feasibility_gap);
        assert_eq!(rk_report_trace_row(report, rows, &mut row), RkStatus::Config);

        let summary = rk_report_summary_json(report);
        assert!(!summary.is_null());
        let text = CStr::from_ptr(summary).to_str().unwrap().to_owned();
        rk_string_free(summary);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["seed"], 4);
        assert_eq!(v["budget"], 300);

        rk_report_free(report);
        rk_config_free(cfg);
    }
    assert!(dir.path().join("ffi.csv").exists());
}

#[test]
fn configuration_errors_map_to_status_two() {
    let bad = CString::new(r#"{"experiment":"qcbp_gaussian","problem":{"n":0}}"#).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(rk_config_from_json(bad.as_ptr(), &mut cfg), RkStatus::Config);
        assert!(cfg.is_null());
        assert!(last_error().contains("problem.n"));
        let missing = CString::new("/nonexistent/config.json").unwrap();
        assert_eq!(rk_config_load(missing.as_ptr(), &mut cfg), RkStatus::Config);
        let garbage = CString::new("{ nope").unwrap();
        assert_eq!(rk_config_from_json(garbage.as_ptr(), &mut cfg), RkStatus::Config);
    }
}

#[test]
fn solver_failure_maps_to_status_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    std::fs::write(&data, "1,2,1e200\n3,4,1e200\n5,1,2\n").unwrap();
    let json = format!(
        r#"{{"experiment":"srlasso","scheme":"none","output_path":{:?},"problem":{{"dataset":{{"path":{:?},"format":"csv"}},"reference_optimum":1.0}},"restart":{{"t":20}}}}"#,
        dir.path().join("t.csv").to_str().unwrap(),
        data.to_str().unwrap()
    );
    let json = CString::new(json).unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(rk_config_from_json(json.as_ptr(), &mut cfg), RkStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(rk_run(cfg, 1, &mut report), RkStatus::SolverFailure);
        assert!(report.is_null());
        assert!(last_error().contains("not finite"));
        rk_config_free(cfg);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(rk_config_from_json(ptr::null(), &mut ptr::null_mut()), RkStatus::NullPointer);
        let json = CString::new("{}").unwrap();
        assert_eq!(rk_config_from_json(json.as_ptr(), ptr::null_mut()), RkStatus::NullPointer);
        assert_eq!(rk_run(ptr::null(), 1, &mut ptr::null_mut()), RkStatus::NullPointer);
        assert_eq!(rk_config_set_seed(ptr::null_mut(), 1), RkStatus::NullPointer);
        assert_eq!(rk_report_inner_iterations(ptr::null()), 0);
        assert!(rk_report_final_objective(ptr::null()).is_nan());
        assert!(rk_report_summary_json(ptr::null()).is_null());
        rk_config_free(ptr::null_mut());
        rk_report_free(ptr::null_mut());
        rk_schedule_free(ptr::null_mut());
        rk_string_free(ptr::null_mut());
    }
}

#[test]
fn budget_change_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let json = qcbp_json(dir.path(), 100);
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(rk_config_from_json(json.as_ptr(), &mut cfg), RkStatus::Ok);
        assert_eq!(rk_config_set_budget(cfg, 250), RkStatus::Ok);
        let path = CString::new(dir.path().join("other.csv").to_str().unwrap()).unwrap();
        assert_eq!(rk_config_set_output(cfg, path.as_ptr()), RkStatus::Ok);
        let mut report = ptr::null_mut();
        assert_eq!(rk_run(cfg, 0, &mut report), RkStatus::Ok);
        assert!(rk_report_inner_iterations(report) <= 250);
        rk_report_free(report);
        rk_config_free(cfg);
    }
    assert!(dir.path().join("other.csv").exists());
}

#[test]
fn schedule_enumeration() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(rk_schedule_new(RkScheduleMode::BothUnknown, 2.0, 2.0, &mut s), RkStatus::Ok);
        let mut p = RkGridPoint::default();
        assert_eq!(rk_schedule_next(s, &mut p), RkStatus::Ok);
        assert_eq!((p.i, p.j, p.k, p.h), (0, 0, 1, 1.0));
        let mut last = p.h;
        for _ in 0..500 {
            assert_eq!(rk_schedule_next(s, &mut p), RkStatus::Ok);
            assert!(p.h >= last);
            last = p.h;
        }
        let mut count = 0;
        assert_eq!(rk_schedule_sublevel_count(s, 100.0, &mut count), RkStatus::Ok);
        assert!(count > 0 && count <= 800);
        rk_schedule_free(s);

        assert_eq!(rk_schedule_new(RkScheduleMode::AlphaKnown, 0.5, 2.0, &mut s), RkStatus::Config);
        assert!(s.is_null());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(rk_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_interface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/restartkit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rk_config_from_json",
        "rk_run",
        "rk_report_trace_row",
        "rk_schedule_next",
        "rk_last_error_message",
        "RK_STATUS_SOLVER_FAILURE = 3",
        "typedef struct RkReport RkReport;",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // The header must also be valid C.
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"restartkit.h\"\nint main(void) { RkConfig *c = 0; RkStatus s = rk_config_from_json(\"{}\", &c); rk_config_free(c); return (int)s; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(e) => eprintln!("C compiler unavailable, syntax check skipped: {e}"),
    }
}
