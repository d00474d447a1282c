import csv
from pathlib import Path
from typing import Any, Dict, List, Optional

from ruamel.yaml import YAML

from output import SUMMARY_HEADER


def list_results(output_dir: Path) -> List[str]:
    """Lists pair ids that have a result document in the output directory."""
    if not output_dir.is_dir():
        return []
    return sorted(p.stem for p in output_dir.glob("*.yaml"))


def load_result(output_dir: Path, pair_id: str) -> Optional[Dict[str, Any]]:
    """Loads the result (or error) document of one experiment."""
    path = output_dir / f"{pair_id}.yaml"
    if not path.is_file():
        return None
    yaml = YAML(typ="safe")
    with open(path, "r", encoding="utf-8") as yf:
        return yaml.load(yf)


def load_summary(output_dir: Path) -> List[Dict[str, str]]:
    """Reads summary.csv rows; an unexpected header means the file is not ours."""
    path = output_dir / "summary.csv"
    if not path.is_file():
        return []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != SUMMARY_HEADER:
            raise ValueError(f"{path} does not have the expected summary header")
        return list(reader)
