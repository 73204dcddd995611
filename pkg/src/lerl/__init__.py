"""Population-based Q-learning with lineage-aware evolution."""

from .agent import (DQNConfig, IterationStats, QAgent, ReplayBuffer, Transition,
                    clone_for_evolution, epsilon_at, run_iteration,
                    select_action, td_loss, td_loss_batch, train_step)
from .checkpoint import (CheckpointError, checkpoint_population, load_agent,
                         restore_population, save_agent)
from .config import ConfigError, load_run_config, parse_config
from .envs import (ChainWalk, EnvSpec, GridWorld, StepResult,
                   evaluate_deterministic, make_env)
from .evolution import (AgentOutcome, EvolutionResult, LineageDecay,
                        MutationConfig, crossover, disturbance_amplitude,
                        evolution_step, mutate, sample_disturbance)
from .lineage import (EvalRecord, EvalWeights, PartitionPlan,
                      comprehensive_evaluation, lineage_update,
                      normalize_scores, partition_population,
                      rank_by_performance)
from .metrics import (CurvePoint, aggregate_curves, comparative_report,
                      growth_rate)
from .net import LayeredNet, glorot_init
from .orchestrator import (PopulationConfig, RunResult, derive_seed,
                           run_baseline, run_lerl)

__version__ = "0.1.0"
