"""Share a short message among 64 players, drop down to the reconstruction threshold, and recover it."""

import random
from fractions import Fraction

import numpy as np

from binshare.sss import (
    combine_blocks,
    derive_params,
    frame_blocks,
    share_blocks,
    unframe_blocks,
)


def main():
    params = derive_params(64, Fraction(1, 4), Fraction(3, 4), "adaptive", certify=False)
    print(f"N={params.N} t={params.t} r={params.r} ell={params.ell} delta_hat={params.delta_budget:.3g}")

    message = b"attack at dawn"
    blocks = frame_blocks(message, params.ell)
    shares = share_blocks(params, blocks, sharing_seed=1, control_seed=2).astype(np.int8)

    rng = random.Random(3)
    lost = rng.sample(range(params.N), params.N - params.r)
    shares[:, lost] = -1
    print(f"erased players {sorted(lost)}")

    secrets = combine_blocks(params, shares, control_seed=2)
    failed = [i for i, s in enumerate(secrets) if s is None]
    if failed:
        print(f"blocks {failed} did not decode")
        return
    print("recovered:", unframe_blocks(secrets, params.ell, 8 * len(message)))


if __name__ == "__main__":
    main()
