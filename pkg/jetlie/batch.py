"""
Parallel runs over a directory of input files.

- every ``*.jlie`` file is parsed and run on a thread pool with a progress bar
- a JSON report (timestamp, settings, summary, per-file details) goes to reports/
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

from tqdm import tqdm

from .config import Config
from .dsl import parse_input
from .errors import JetlieError
from .runner import input_digest, run

logger = logging.getLogger(__name__)

SAMPLE_PATTERN = "*.jlie"


def process_single_file(path: Path) -> Dict:
    """Parse and run one input file; never raises"""
    start_time = time.time()
    result: Dict = {
        "input_file": path.name,
        "command": None,
        "status": "pending",
        "exit_code": None,
        "input_digest": None,
        "error": None,
        "document": None,
    }
    try:
        text = path.read_text(encoding="utf-8")
        result["input_digest"] = input_digest(text)
        job = parse_input(text)
        outcome = run(job, result["input_digest"])
        result["command"] = outcome.command
        result["status"] = "success" if outcome.ok else "failed"
        result["exit_code"] = outcome.exit_code
        result["document"] = outcome.document
    except JetlieError as e:
        logger.error(f"❌ Failed: {path.name} - {e}")
        result["status"] = "error"
        result["exit_code"] = e.exit_code
        result["error"] = str(e)
    except OSError as e:
        logger.error(f"❌ Cannot read {path.name} - {e}")
        result["status"] = "error"
        result["exit_code"] = 2
        result["error"] = str(e)
    finally:
        result["processing_time"] = time.time() - start_time
    return result


def process_batch_parallel(paths: List[Path]) -> List[Dict]:
    """Run input files in parallel with progress tracking; results in input order"""
    results: Dict[Path, Dict] = {}
    with ThreadPoolExecutor(max_workers=Config.MAX_WORKERS) as executor:
        future_to_path = {executor.submit(process_single_file, path): path for path in paths}
        with tqdm(total=len(paths), desc="Running inputs") as pbar:
            for future in as_completed(future_to_path):
                path = future_to_path[future]
                result = future.result()
                results[path] = result
                status_icon = {"success": "✅", "failed": "❌", "error": "⚠️"}.get(
                    result["status"], "❓"
                )
                pbar.set_postfix_str(f"{status_icon} {path.name}")
                pbar.update(1)
    return [results[path] for path in paths]


def generate_report(results: List[Dict], output_dir: Optional[Path] = None) -> Path:
    """Write the batch report and log a summary"""
    output_dir = output_dir or Config.REPORTS_DIR
    output_dir.mkdir(exist_ok=True, parents=True)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    report_path = output_dir / f"jetlie_report_{timestamp}.json"

    total = len(results)
    successful = sum(1 for r in results if r["status"] == "success")
    failed = sum(1 for r in results if r["status"] == "failed")
    errors = sum(1 for r in results if r["status"] == "error")
    total_time = sum(r.get("processing_time", 0) for r in results)

    report = {
        "timestamp": datetime.now().isoformat(),
        "settings": Config.summary(),
        "summary": {
            "total_files": total,
            "successful": successful,
            "failed": failed,
            "errors": errors,
            "total_processing_time": f"{total_time:.2f} seconds",
            "average_time_per_file": f"{total_time / total:.2f} seconds" if total > 0 else "0",
        },
        "details": results,
    }
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, ensure_ascii=False)

    logger.info("=" * 60)
    logger.info("📊 BATCH COMPLETE")
    logger.info(f"   Total files: {total}")
    logger.info(f"   ✅ Successful: {successful}")
    logger.info(f"   ❌ Failed checks: {failed}")
    logger.info(f"   ⚠️  Input errors: {errors}")
    logger.info(f"   ⏱️  Total time: {total_time:.1f}s")
    logger.info(f"   📄 Report saved: {report_path}")
    logger.info("=" * 60)
    return report_path


def run_batch(directory: Optional[Path] = None, output_dir: Optional[Path] = None) -> int:
    """Run every sample in a directory; exit code is the worst per-file code"""
    directory = directory or Config.SAMPLES_DIR
    paths = sorted(directory.glob(SAMPLE_PATTERN))
    if not paths:
        logger.warning(f"No {SAMPLE_PATTERN} files found in {directory}")
        return 2
    logger.info(f"Found {len(paths)} input files in {directory}")
    results = process_batch_parallel(paths)
    generate_report(results, output_dir)
    return max(r["exit_code"] or 0 for r in results)
