#![no_main]

use bslab_core::schreier::MarkedGroup;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for group in [MarkedGroup::free(3), MarkedGroup::surface(2), MarkedGroup::free_abelian(2)] {
        let group = group.unwrap();
        if let Ok(w) = group.parse(text) {
            assert_eq!(group.parse(&group.format(&w)).unwrap(), w);
        }
    }
});
