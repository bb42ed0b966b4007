#!/usr/bin/env python3
"""
Prepare a wpressure checkout: dependencies, .env and a test run.
"""
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def step(args, label):
    """Run one setup step from the repository root; False when it exits non-zero."""
    print(f"📋 {label}")
    result = subprocess.run(args, cwd=ROOT)
    if result.returncode != 0:
        print(f"❌ {label} exited with {result.returncode}")
        return False
    print(f"✅ {label}")
    return True


def main():
    print("🚀 wpressure development setup")

    # tomllib
    if sys.version_info < (3, 11):
        print(f"❌ Python 3.11+ required, found {sys.version.split()[0]}")
        sys.exit(1)

    if not step([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"], "Install requirements"):
        sys.exit(1)

    env, example = ROOT / ".env", ROOT / ".env.example"
    if not env.exists() and example.exists():
        shutil.copyfile(example, env)
        print("📝 Created .env from .env.example (WPRESSURE_* settings)")

    if not step([sys.executable, "-m", "pytest", "-q"], "Test suite"):
        sys.exit(1)

    print("\n🎉 Ready. Try:")
    print("   python -m app.main pressure --config configs/full-4-to-2.toml")
    print("   python -m app.main verify all --config configs/classical.toml")


if __name__ == "__main__":
    main()
