from typing import Any

import wandb


def __getattr__(self, key: str) -> Any:
  if not key.startswith("_"):
    raise wandb.Error(f"...")
  else:
    raise AttributeError
