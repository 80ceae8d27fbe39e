use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cfsim_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        cfsim_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn wscc9() -> *mut CfsimNetwork {
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { cfsim_network_wscc9(&mut net) }, CfsimStatus::Ok);
    net
}

#[test]
fn power_flow_through_handle() {
    let net = wscc9();
    unsafe {
        assert_eq!(cfsim_network_bus_count(net), 9);
        let (mut vm, mut va) = ([0.0; 9], [0.0; 9]);
        assert_eq!(cfsim_power_flow(net, 1e-10, vm.as_mut_ptr(), va.as_mut_ptr(), 9), CfsimStatus::Ok);
        assert_eq!(vm[0], 1.04);
        assert_eq!(va[0], 0.0);
        assert!(vm.iter().all(|v| (0.9..1.1).contains(v)));
        assert_eq!(cfsim_power_flow(net, 1e-10, vm.as_mut_ptr(), va.as_mut_ptr(), 8), CfsimStatus::BufferTooSmall);
        assert!(last_error().contains("need 9"));
        cfsim_network_free(net);
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        let mut out = [0.0; 9];
        assert_eq!(
            cfsim_power_flow(ptr::null(), 1e-8, out.as_mut_ptr(), out.as_mut_ptr(), 9),
            CfsimStatus::NullPointer
        );
        assert_eq!(cfsim_simulation_step(ptr::null_mut(), 0.01), CfsimStatus::NullPointer);
        assert_eq!(cfsim_network_bus_count(ptr::null()), 0);
        assert!(cfsim_simulation_time(ptr::null()).is_nan());
        cfsim_network_free(ptr::null_mut());
        cfsim_simulation_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors_map_to_status() {
    let text = CString::new("garbage\n").unwrap();
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { cfsim_network_parse(text.as_ptr(), &mut net) }, CfsimStatus::Parse);
    assert!(net.is_null());
    assert!(last_error().contains("line 1"));
}

#[test]
fn error_message_truncates() {
    let text = CString::new("garbage\n").unwrap();
    let mut net = ptr::null_mut();
    unsafe {
        cfsim_network_parse(text.as_ptr(), &mut net);
        let mut buf = [1 as c_char; 5];
        let full = cfsim_last_error(buf.as_mut_ptr(), buf.len());
        assert!(full > 4);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 4);
    }
}

#[test]
fn simulation_responds_to_load_loss() {
    let net = wscc9();
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(cfsim_simulation_new(net, CfsimControl::CigOmegaTilde, 1.2, &mut sim), CfsimStatus::Ok);
        let n = cfsim_simulation_channel_count(sim);
        let mut name = [0 as c_char; 32];
        assert_eq!(cfsim_simulation_channel_name(sim, 0, name.as_mut_ptr(), name.len()), CfsimStatus::Ok);
        assert_eq!(CStr::from_ptr(name.as_ptr()).to_str().unwrap(), "omega_coi");
        assert_eq!(cfsim_simulation_channel_name(sim, n, name.as_mut_ptr(), name.len()), CfsimStatus::InvalidArgument);

        let mut vals = vec![0.0; n];
        assert_eq!(cfsim_simulation_scale_load(sim, 5, 0.5), CfsimStatus::Ok);
        let mut peak: f64 = 0.0;
        for _ in 0..200 {
            assert_eq!(cfsim_simulation_step(sim, 0.01), CfsimStatus::Ok);
            assert_eq!(cfsim_simulation_channels(sim, vals.as_mut_ptr(), n), CfsimStatus::Ok);
            peak = peak.max(vals[0] - 1.0);
        }
        assert!((cfsim_simulation_time(sim) - 2.0).abs() < 1e-9);
        assert!(peak > 1e-3, "load loss should raise frequency, peak {peak}");
        assert_eq!(cfsim_simulation_step(sim, -1.0), CfsimStatus::InvalidArgument);
        cfsim_simulation_free(sim);
        cfsim_network_free(net);
    }
}

#[test]
fn frequency_mode_is_slow_and_damped() {
    let net = wscc9();
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { cfsim_frequency_mode(net, &mut re, &mut im) }, CfsimStatus::Ok);
    let fn_hz = re.hypot(im) / (2.0 * std::f64::consts::PI);
    assert!(re < 0.0 && (0.02..=0.1).contains(&fn_hz), "{re} {im}");
    unsafe { cfsim_network_free(net) };
}

#[test]
fn complex_frequency_of_rotating_phasor() {
    // v = e^{(σ + jΩ)t} at t = 0 in a stationary frame
    let (sigma, big_omega) = (-0.3, 2.0);
    let (mut rho, mut omega) = (0.0, 0.0);
    let st = unsafe { cfsim_complex_frequency(1.0, 0.0, sigma, big_omega, 0.0, &mut rho, &mut omega) };
    assert_eq!(st, CfsimStatus::Ok);
    assert!((rho - sigma).abs() < 1e-15 && (omega - big_omega).abs() < 1e-15);
    let st = unsafe { cfsim_complex_frequency(0.0, 0.0, 1.0, 1.0, 0.0, &mut rho, &mut omega) };
    assert_eq!(st, CfsimStatus::InvalidArgument);
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cfsim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["cfsim_network_wscc9", "cfsim_simulation_step", "cfsim_last_error", "CFSIM_STATUS_OK"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        "#include \"cfsim.h\"\nint main(void) { CfsimNetwork *n = 0; return (int)cfsim_network_wscc9(&n); }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
