import sagemaker
from sagemaker.estimator import Estimator


def launch_training(role, bucket):
    session = sagemaker.Session()
    estimator = Estimator(
        image_uri="382416733822.dkr.ecr.us-east-1.amazonaws.com/xgboost:latest",
        role=role,
        instance_count=1,
        instance_type="ml.m5.xlarge",
        output_path=f"s3://{bucket}/output",
        sagemaker_session=session,
    )
    estimator.fit({"train": f"s3://{bucket}/train"})
    return estimator
