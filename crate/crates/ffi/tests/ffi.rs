use std::ffi::{CStr, CString};
use std::ptr;

use chaindp_ffi::*;

fn preset(name: &str, n: usize) -> *mut ChaindpHamiltonian {
    let name = CString::new(name).unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { chaindp_hamiltonian_from_preset(name.as_ptr(), n, false, &mut h) };
    assert_eq!(status, ChaindpStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = chaindp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn ising_through_every_solver() {
    let h = preset("ising_zz", 4);
    unsafe {
        let (mut d, mut n) = (0, 0);
        assert_eq!(chaindp_hamiltonian_shape(h, &mut d, &mut n), ChaindpStatus::Ok);
        assert_eq!((d, n), (2, 4));

        let mut exact = 0.0;
        assert_eq!(chaindp_exact_ground_energy(h, &mut exact), ChaindpStatus::Ok);
        assert!((exact + 3.0).abs() < 1e-9);

        let mut classical = 0.0;
        let mut config = [9usize; 4];
        assert_eq!(
            chaindp_solve_classical(h, &mut classical, config.as_mut_ptr(), config.len()),
            ChaindpStatus::Ok
        );
        assert!((classical + 3.0).abs() < 1e-12);
        assert!(config.iter().all(|&s| s < 2));

        let mut mf = 0.0;
        assert_eq!(chaindp_solve_mean_field(h, 1.0, &mut mf), ChaindpStatus::Ok);
        assert!(mf >= exact - 1e-9 && mf <= exact + 1.0 + 1e-9);

        let mut sol = ptr::null_mut();
        assert_eq!(chaindp_solve_mps(h, 1, 0.5, 1.6, &mut sol), ChaindpStatus::Ok);
        let (mut e, mut budget) = (0.0, 0.0);
        assert_eq!(chaindp_mps_solution_energy(sol, &mut e, &mut budget), ChaindpStatus::Ok);
        assert!(e >= exact - 1e-9);
        assert!(budget > 0.0);

        let mut json = ptr::null_mut();
        assert_eq!(chaindp_mps_solution_json(sol, &mut json), ChaindpStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("chaindp.mps-solution/1"));
        chaindp_string_free(json);
        chaindp_mps_solution_free(sol);
        chaindp_hamiltonian_free(h);
    }
}

#[test]
fn null_pointers_are_reported() {
    let mut e = 0.0;
    let status = unsafe { chaindp_exact_ground_energy(ptr::null(), &mut e) };
    assert_eq!(status, ChaindpStatus::NullPointer);
    assert!(last_error().contains("null"));

    let mut h = ptr::null_mut();
    let status = unsafe { chaindp_hamiltonian_from_preset(ptr::null(), 4, false, &mut h) };
    assert_eq!(status, ChaindpStatus::NullPointer);
    assert!(h.is_null());
    unsafe {
        chaindp_hamiltonian_free(ptr::null_mut());
        chaindp_mps_solution_free(ptr::null_mut());
        chaindp_string_free(ptr::null_mut());
    }
}

#[test]
fn bad_input_is_rejected() {
    let name = CString::new("no_such_model").unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { chaindp_hamiltonian_from_preset(name.as_ptr(), 4, false, &mut h) };
    assert_eq!(status, ChaindpStatus::InvalidInput);
    assert!(!last_error().is_empty());

    let json = CString::new("{not json").unwrap();
    let status = unsafe { chaindp_hamiltonian_from_json(json.as_ptr(), &mut h) };
    assert_eq!(status, ChaindpStatus::InvalidInput);
}

#[test]
fn short_configuration_buffer() {
    let h = preset("ising_zz", 5);
    let mut e = 0.0;
    let mut config = [0usize; 2];
    let status = unsafe { chaindp_solve_classical(h, &mut e, config.as_mut_ptr(), config.len()) };
    assert_eq!(status, ChaindpStatus::InvalidInput);
    unsafe { chaindp_hamiltonian_free(h) };
}

#[test]
fn oversized_exact_is_a_resource_error() {
    let h = preset("heisenberg", 13);
    let mut e = 0.0;
    let status = unsafe { chaindp_exact_ground_energy(h, &mut e) };
    assert_eq!(status, ChaindpStatus::Resource);
    unsafe { chaindp_hamiltonian_free(h) };
}

#[test]
fn cost_logs() {
    let (mut mf, mut mps) = (0.0, 0.0);
    let status = unsafe { chaindp_cost_log10(10, 2, 2, 0.1, &mut mf, &mut mps) };
    assert_eq!(status, ChaindpStatus::Ok);
    assert!(mf.is_finite() && mps > mf);
}

#[test]
fn header_lists_every_export() {
    let header = include_str!("../include/chaindp.h");
    for f in [
        "chaindp_last_error",
        "chaindp_hamiltonian_from_preset",
        "chaindp_hamiltonian_from_json",
        "chaindp_hamiltonian_free",
        "chaindp_solve_mps",
        "chaindp_mps_solution_free",
        "chaindp_string_free",
        "chaindp_cost_log10",
        "CHAINDP_STATUS_PANIC",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}
