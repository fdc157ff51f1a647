#![no_main]

use bslab_core::testfn::TestFunctionSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = TestFunctionSpec::from_json(text) {
        let json = serde_json::to_string(&f.spec()).unwrap();
        assert_eq!(TestFunctionSpec::from_json(&json).unwrap(), f);
        let origin = vec![0.0; f.dim()];
        assert!(f.eval(&origin).is_finite());
        assert!(f.eval_ft(&origin).is_finite());
    }
});
