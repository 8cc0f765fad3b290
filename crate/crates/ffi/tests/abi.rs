use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use instmatte_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(im_last_error_message()) }.to_string_lossy().into_owned()
}

fn image(w: u32, h: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> *mut ImImage {
    let f = &f;
    let data: Vec<u8> = (0..h).flat_map(|y| (0..w).flat_map(move |x| f(x, y))).collect();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { im_image_new(w, h, data.as_ptr(), data.len(), &mut out) }, ImStatus::Ok);
    out
}

fn mask(w: u32, h: u32, f: impl Fn(u32, u32) -> bool) -> *mut ImMask {
    let f = &f;
    let data: Vec<u8> = (0..h).flat_map(|y| (0..w).map(move |x| u8::from(f(x, y)))).collect();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { im_mask_new(w, h, data.as_ptr(), data.len(), &mut out) }, ImStatus::Ok);
    out
}

fn alpha_values(a: *const ImAlpha) -> Vec<f64> {
    let n = unsafe { im_alpha_width(a) * im_alpha_height(a) } as usize;
    let mut v = vec![0.0; n];
    assert_eq!(unsafe { im_alpha_copy_data(a, v.as_mut_ptr(), n) }, ImStatus::Ok);
    v
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let data = [0u8; 5];
    let st = unsafe { im_image_new(2, 2, data.as_ptr(), data.len(), &mut out) };
    assert_eq!(st, ImStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("expected 12"), "{}", last_error());

    assert_eq!(unsafe { im_image_new(1, 1, ptr::null(), 3, &mut out) }, ImStatus::NullPointer);
    assert_eq!(unsafe { im_image_copy_data(ptr::null(), ptr::null_mut(), 0) }, ImStatus::NullPointer);

    let empty = mask(4, 4, |_, _| false);
    let mut tri = [0u8; 16];
    assert_eq!(unsafe { im_mask_to_trimap(empty, 1, tri.as_mut_ptr(), 16) }, ImStatus::EmptyInput);
    assert!(!last_error().is_empty());
    unsafe { im_mask_free(empty) };

    let bad = [0.5, 1.5];
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { im_alpha_new(2, 1, bad.as_ptr(), 2, &mut a) }, ImStatus::InvalidArgument);

    let ok = [0.5, 1.0];
    assert_eq!(unsafe { im_alpha_new(2, 1, ok.as_ptr(), 2, &mut a) }, ImStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { im_alpha_free(a) };
    unsafe { im_image_free(ptr::null_mut()) };
}

#[test]
fn trimap_and_composite() {
    let m = mask(9, 9, |x, y| (2..7).contains(&x) && (2..7).contains(&y));
    let mut tri = [0u8; 81];
    assert_eq!(unsafe { im_mask_to_trimap(m, 1, tri.as_mut_ptr(), 81) }, ImStatus::Ok);
    assert_eq!(tri[4 * 9 + 4], 255);
    assert_eq!(tri[2 * 9 + 2], 128);
    assert_eq!(tri[0], 0);
    unsafe { im_mask_free(m) };

    let fg = image(2, 1, |_, _| [200, 200, 200]);
    let bg = image(2, 1, |_, _| [100, 100, 100]);
    let mut a = ptr::null_mut();
    let vals = [0.5, 1.0];
    assert_eq!(unsafe { im_alpha_new(2, 1, vals.as_ptr(), 2, &mut a) }, ImStatus::Ok);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { im_composite(fg, bg, a, &mut out) }, ImStatus::Ok);
    let mut px = [0u8; 6];
    assert_eq!(unsafe { im_image_copy_data(out, px.as_mut_ptr(), 6) }, ImStatus::Ok);
    assert_eq!(px, [150, 150, 150, 200, 200, 200]);

    let small = image(1, 1, |_, _| [0, 0, 0]);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { im_composite(fg, small, a, &mut bad) }, ImStatus::DimensionMismatch);
    unsafe {
        im_image_free(small);
        im_image_free(out);
        im_image_free(fg);
        im_image_free(bg);
        im_alpha_free(a);
    }
}

#[test]
fn metrics_over_region() {
    let (mut a, mut g) = (ptr::null_mut(), ptr::null_mut());
    let av = [0.2, 0.4, 0.6, 0.8];
    let gv = [0.2, 0.5, 0.6, 0.6];
    unsafe {
        assert_eq!(im_alpha_new(2, 2, av.as_ptr(), 4, &mut a), ImStatus::Ok);
        assert_eq!(im_alpha_new(2, 2, gv.as_ptr(), 4, &mut g), ImStatus::Ok);
    }
    let mut m = ImMetrics::default();
    assert_eq!(unsafe { im_metrics(a, g, ptr::null(), &mut m) }, ImStatus::Ok);
    assert_eq!(m.pixels, 4);
    assert!((m.sad - 0.3).abs() < 1e-12);
    assert!((m.mse - 0.05 / 4.0).abs() < 1e-12);

    let region = mask(2, 2, |x, y| x == 1 && y == 0);
    assert_eq!(unsafe { im_metrics(a, g, region, &mut m) }, ImStatus::Ok);
    assert_eq!(m.pixels, 1);
    assert!((m.mse - 0.01).abs() < 1e-12);
    unsafe {
        im_mask_free(region);
        im_alpha_free(a);
        im_alpha_free(g);
    }
}

#[test]
fn matte_instance_separates_two_tones() {
    let (w, h) = (40, 40);
    let img = image(w, h, |x, y| {
        if (12..28).contains(&x) && (12..28).contains(&y) {
            [230, 160, 30]
        } else {
            [20, 60, 150]
        }
    });
    // Coarse mask a little larger than the object.
    let m = mask(w, h, |x, y| (10..30).contains(&x) && (10..30).contains(&y));
    let mut cfg = im_config_default();
    assert_eq!(cfg.passes, 4);
    assert_eq!(cfg.samples_k, 10);
    cfg.passes = 2;
    cfg.samples_k = 2;

    let mut a = ptr::null_mut();
    let st = unsafe { im_matte_instance(img, m, ptr::null(), ptr::null(), 0, &cfg, &mut a) };
    assert_eq!(st, ImStatus::Ok, "{}", last_error());
    let v = alpha_values(a);
    assert!(v[20 * 40 + 20] > 0.98);
    assert!(v[0] < 0.02);
    assert!(v[11 * 40 + 20] < 0.1, "{}", v[11 * 40 + 20]);

    let bbox = [10u32, 10, 30, 30];
    let mut b = ptr::null_mut();
    assert_eq!(
        unsafe { im_matte_instance(img, m, bbox.as_ptr(), ptr::null(), 0, &cfg, &mut b) },
        ImStatus::Ok
    );
    assert_eq!(alpha_values(b), v);

    let bad_box = [30u32, 10, 10, 30];
    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { im_matte_instance(img, m, bad_box.as_ptr(), ptr::null(), 0, &cfg, &mut c) },
        ImStatus::InvalidArgument
    );

    cfg.passes = 0;
    assert_eq!(
        unsafe { im_matte_instance(img, m, ptr::null(), ptr::null(), 0, &cfg, &mut c) },
        ImStatus::InvalidArgument
    );
    unsafe {
        im_alpha_free(a);
        im_alpha_free(b);
        im_mask_free(m);
        im_image_free(img);
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/instmatte.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for name in ["im_matte_instance", "im_config_default", "im_last_error_message", "ImStatus"] {
        assert!(text.contains(name), "{name} missing from header");
    }

    let Some(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    let tmp = tempfile_path("abi_check.c");
    std::fs::write(
        &tmp,
        "#include \"instmatte.h\"\nint main(void) { ImConfig c = im_config_default(); (void)c; return IM_STATUS_OK; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&tmp)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

fn tempfile_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("instmatte-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}
