"""Write every built-in scenario to a directory and verify the files round-trip."""

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

from orbichar.checks import verify
from orbichar.scenarios import BUILTINS, builtin, dump_scenario, load_scenario


@dataclass
class Config:
    out: Path = Path("scenarios")
    seed: int = 20240229


def main(cfg: Config) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    for name in sorted(BUILTINS):
        sc = builtin(name)
        path = cfg.out / f"{name}.json"
        path.write_text(dump_scenario(sc) + "\n")
        back = load_scenario(str(path))
        a = json.dumps([r.to_json() for r in verify(sc, cfg.seed)], sort_keys=True)
        b = json.dumps([r.to_json() for r in verify(back, cfg.seed)], sort_keys=True)
        status = sorted({r.status for r in verify(back, cfg.seed)})
        print(f"{path}  roundtrip={'same' if a == b else 'DIFFERENT'}  statuses={','.join(status)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Config.out)
    ap.add_argument("--seed", type=int, default=Config.seed)
    a = ap.parse_args()
    main(Config(a.out, a.seed))
