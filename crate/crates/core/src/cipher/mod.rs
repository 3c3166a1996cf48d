//! AES-128 and Speck-128/128 with the round-1/round-2 taps the attacks target.

mod aes;
mod block;
mod limb;
mod speck;

pub use aes::{aes128_encrypt, aes_round1_intermediates, expand_key, sbox, AesRound1, SBOX};
pub use block::Block128;
pub use limb::{LimbInt, LimbWidth, RotateDirection};
pub use speck::{
    recover_k1, speck128_encrypt, speck128_encrypt_limbs, speck_key_schedule, speck_round1_values,
    speck_round2_target, SpeckKeySchedule, SpeckRound1, SPECK128_ROUNDS,
};
