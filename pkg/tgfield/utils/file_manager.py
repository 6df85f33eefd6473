"""File system management utilities."""
import csv
import json
from pathlib import Path
from typing import List, Optional, Sequence

from tgfield.config import settings


class FileManager:
    """Manages result files for suite runs."""

    @staticmethod
    def get_results_dir() -> Path:
        """Get the default results directory."""
        return Path(settings.results_dir)

    @staticmethod
    def resolve_output(output: Optional[str], default_name: str) -> Path:
        """
        Resolve the path a result is written to.

        Args:
            output: Explicit path from --out, or None
            default_name: File name used under the results directory

        Returns:
            Path with parent directories created
        """
        path = Path(output) if output else FileManager.get_results_dir() / default_name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def save_json(path: Path, payload: dict) -> str:
        """
        Save a payload as stable, sorted JSON.

        Args:
            path: Destination file
            payload: JSON-serializable dictionary

        Returns:
            Path where the payload was saved
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        return str(path)

    @staticmethod
    def save_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> str:
        """
        Save rows as CSV with a header row.

        Args:
            path: Destination file
            header: Column names
            rows: Row values; floats are written with repr precision

        Returns:
            Path where the table was saved
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        return str(path)

    @staticmethod
    def load_csv(path: Path) -> List[List[str]]:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return list(csv.reader(f))

    @staticmethod
    def sibling(path: Path, suffix: str) -> Path:
        """`results.json` -> `results_<suffix>.csv` next to it."""
        path = Path(path)
        return path.with_name(f"{path.stem}_{suffix}.csv")
