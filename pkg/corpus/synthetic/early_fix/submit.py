from azureml.core import Experiment, ScriptRunConfig, Workspace
from azureml.train.hyperdrive import (
    BanditPolicy,
    HyperDriveConfig,
    PrimaryMetricGoal,
    RandomParameterSampling,
    uniform,
)


def submit_sweep():
    workspace = Workspace.from_config()
    experiment = Experiment(workspace, "credit-model-sweep")
    config = ScriptRunConfig(source_directory=".", script="train.py",
                             compute_target="cpu-cluster")
    policy = BanditPolicy(evaluation_interval=2, slack_factor=0.1)
    sweep = HyperDriveConfig(
        run_config=config,
        hyperparameter_sampling=RandomParameterSampling({"learning_rate": uniform(0.01, 0.3)}),
        policy=policy,
        primary_metric_name="accuracy",
        primary_metric_goal=PrimaryMetricGoal.MAXIMIZE,
        max_total_runs=12,
    )
    run = experiment.submit(sweep)
    run.wait_for_completion()
    return run
