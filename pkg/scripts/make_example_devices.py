#!/usr/bin/env python3
"""Write the canonical example device file used in the README and tests."""

import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from qcompat.fixtures import I2, PMX, PMZ, PX, PZ  # noqa: E402


def jmat(m):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def main(out_path: str) -> None:
    root_pz = np.diag([1.0, np.sqrt(0.5)]).astype(complex)  # sqrt(Pz + P-z/2)
    doc = {
        "devices": [
            {
                "name": "px",
                "type": "effect",
                "dims": {"in": 2},
                "payload": {"matrix": jmat(PX)},
            },
            {
                "name": "pz",
                "type": "effect",
                "dims": {"in": 2},
                "payload": {"matrix": jmat(PZ)},
            },
            {
                "name": "sharp_z",
                "type": "observable",
                "dims": {"in": 2},
                "payload": {
                    "outcomes": ["+", "-"],
                    "effects": {"+": jmat(PZ), "-": jmat(PMZ)},
                },
            },
            {
                "name": "luders_px",
                "type": "operation",
                "dims": {"in": 2, "out": 2},
                "payload": {"kraus": [jmat(PX)]},
            },
            {
                "name": "luders_pz",
                "type": "operation",
                "dims": {"in": 2, "out": 2},
                "payload": {"kraus": [jmat(PZ)]},
            },
            {
                "name": "luders_biased_z",
                "type": "operation",
                "dims": {"in": 2, "out": 2},
                "payload": {"kraus": [jmat(root_pz)]},
            },
            {
                "name": "half_sigma_x",
                "type": "operation",
                "dims": {"in": 2, "out": 2},
                "payload": {
                    "kraus": [jmat(np.array([[0, 1], [1, 0]]) / np.sqrt(2))]
                },
            },
            {
                "name": "x_dephasing",
                "type": "channel",
                "dims": {"in": 2, "out": 2},
                "payload": {"kraus": [jmat(PX), jmat(PMX)]},
            },
            {
                "name": "luders_x_instrument",
                "type": "instrument",
                "dims": {"in": 2, "out": 2},
                "payload": {
                    "outcomes": ["+", "-"],
                    "branches": {"+": {"kraus": [jmat(PX)]}, "-": {"kraus": [jmat(PMX)]}},
                },
            },
            {
                "name": "swap_readout",
                "type": "model",
                "dims": {"in": 2, "out": 2},
                "payload": {
                    "dim_v1": 2,
                    "dim_v2": 2,
                    "eta": jmat(np.eye(2) / 2),
                    "unitary": jmat(
                        np.array(
                            [
                                [1, 0, 0, 0],
                                [0, 0, 1, 0],
                                [0, 1, 0, 0],
                                [0, 0, 0, 1],
                            ]
                        )
                    ),
                    "pointer": {
                        "outcomes": ["+", "-"],
                        "effects": {"+": jmat(PZ), "-": jmat(PMZ)},
                    },
                },
            },
        ]
    }
    with open(out_path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "scripts/example_devices.json")
