from azureml.core import Experiment, ScriptRunConfig, Workspace


def submit_training():
    workspace = Workspace.from_config()
    experiment = Experiment(workspace, "credit-model")
    config = ScriptRunConfig(source_directory=".", script="train.py",
                             compute_target="cpu-cluster")
    run = experiment.submit(config)
    run.wait_for_completion(show_output=True)
    return run
