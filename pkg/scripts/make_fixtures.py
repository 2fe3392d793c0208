"""Regenerate the golden fixtures in docs/fixtures (one per artifact type)."""
import os
from pathlib import Path

from bergman_sense import io
from bergman_sense.cli import main
from bergman_sense.identity import SensingIdentity

OUT = Path(__file__).resolve().parent.parent / "docs" / "fixtures"
ARC = "-1.3,-0.09012728233186929;-1,0;0,0.12701665379258298;1,0;1.3,-0.09012728233186929"


def run(*argv: str) -> None:
    status = main(list(argv))
    if status != 0:
        raise SystemExit(f"{argv[0]} exited with {status}")


def build() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    # relative paths keep the recorded configs machine-independent
    os.chdir(OUT)
    small = SensingIdentity({"kind": "disc"}, 0.0, 0.5, [0.5, 0.2 - 0.1j], 0.25, "gram-optimal")
    io.write_json("small.identity.json", io.identity_to_dict(small, {"source": "hand-written"}))
    run("table", "small.identity.json", "-o", "small.table.json")
    run("sense-disc", "--b", "0.5,0", "--eps", "1e-4", "--mode", "l2", "-o", "disc.identity.json")
    run("sense-probe", "--a=-1", "--b", "1", f"--waypoints={ARC}", "--sigma", "0.25",
        "--omega-rect=-2,2,-1,1", "--order", "12", "-o", "arc")
    run("runge", "--curve", "0.4,0;-0.4,0", "--delta", "0.3", "--eps", "1e-2",
        "--boundary-circle", "0,0,1.1", "-o", "segment")
    run("verify", "arc.table.json", "--family", "harmonic", "--M", "1", "--seed", "7",
        "--count", "20", "-o", "arc.report.json")
    run("sweep", "--b", "0.5,0", "--Nmax", "8", "--count", "20", "--seed", "0",
        "-o", "sweep.csv")


if __name__ == "__main__":
    build()
