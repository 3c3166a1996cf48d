//! Cross-checks against the RustCrypto `aes` and `speck-cipher` crates.

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit as _};
use speck_cipher::cipher::{Array, BlockCipherEncrypt, KeyInit};
use speck_cipher::Speck128_128;
use tracelab_core::cipher::{aes128_encrypt, speck128_encrypt, speck_key_schedule, Block128};
use tracelab_core::rng::Xorshift64Star;

fn random_block(g: &mut Xorshift64Star) -> Block128 {
    Block128(std::array::from_fn(|_| g.next_u8()))
}

#[test]
fn aes_matches_rustcrypto() {
    let mut g = Xorshift64Star::new(11);
    for _ in 0..10_000 {
        let (k, p) = (random_block(&mut g), random_block(&mut g));
        let mut b = GenericArray::clone_from_slice(&p.0);
        aes::Aes128::new(GenericArray::from_slice(&k.0)).encrypt_block(&mut b);
        assert_eq!(aes128_encrypt(&p, &k).0.as_slice(), b.as_slice(), "key {k} pt {p}");
    }
}

#[test]
fn speck_matches_rustcrypto() {
    let mut g = Xorshift64Star::new(12);
    for _ in 0..10_000 {
        let (k, p) = (random_block(&mut g), random_block(&mut g));
        let mut b = Array::try_from(&p.0[..]).unwrap();
        Speck128_128::new_from_slice(&k.0).unwrap().encrypt_block(&mut b);
        let (k1, k2) = k.words();
        let (p1, p2) = p.words();
        let (c1, c2) = speck128_encrypt(p1, p2, &speck_key_schedule(k1, k2));
        assert_eq!(Block128::from_words(c1, c2).0.as_slice(), &b[..], "key {k} pt {p}");
    }
}
