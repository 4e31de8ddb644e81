"""powertalk: power-domain CSI acquisition, exchange, and allocation simulator."""

from .network import (
    ChannelState,
    GainStatistics,
    PowerProfile,
    Scenario,
    build_grid_scenario,
    received_power,
    sample_channel,
    sinr,
)
from .feedback import (
    Dmc,
    RsQuantizer,
    build_nearest_neighbor_dmc,
    build_uniform_db_quantizer,
    quantize_rs,
    sample_rssi,
)
from .local_estimation import (
    LocalCsiEstimate,
    TrainingMatrix,
    diagonal_training,
    lspd_estimate,
    ml_set_contains,
    mmsepd_estimate_enumerate,
    mmsepd_estimate_mc,
)
from .gain_quantizers import (
    RepTransitionMatrix,
    ScalarGainQuantizer,
    design_alma,
    design_lma,
    design_meq,
    end_to_end_distortion,
    estimate_pi_empirical,
)
from .exchange import (
    DistributedCsi,
    ExchangeSchedule,
    PowerAlphabet,
    assemble_distributed_csi,
    decode_powers,
    default_alphabet,
    encode_powers,
)
from .allocation import (
    PowerGrid,
    UtilitySpec,
    exhaustive_oracle,
    iwfa,
    sum_ee,
    sum_rate,
    team_brd,
)
from .metrics import TrialRecord, esnr, relative_utility_loss
from .experiments import ExperimentConfig, run_sweep, sir_controlled_stats, write_csv

__version__ = "0.1.0"
