import boto3
import pandas as pd
import tensorflow_data_validation as tfdv
from sklearn.model_selection import train_test_split

FEATURES = ["age", "income", "balance"]


def launch(bucket):
    frame = pd.read_csv("customers.csv")
    X_train, X_test, y_train, y_test = train_test_split(
        frame[FEATURES], frame["churn"], test_size=0.2
    )
    train_stats = tfdv.generate_statistics_from_dataframe(X_train)
    test_stats = tfdv.generate_statistics_from_dataframe(X_test)
    schema = tfdv.infer_schema(train_stats)
    anomalies = tfdv.validate_statistics(test_stats, schema)
    if anomalies.anomaly_info:
        raise ValueError("train/test schema mismatch")
    X_train.to_csv(f"s3://{bucket}/train.csv")
    X_test.to_csv(f"s3://{bucket}/validation.csv")
    client = boto3.client("sagemaker")
    client.create_training_job(
        TrainingJobName="churn-xgb",
        AlgorithmSpecification={"TrainingImage": "xgboost:latest", "TrainingInputMode": "File"},
        RoleArn="arn:aws:iam::000000000000:role/SageMakerRole",
        ResourceConfig={"InstanceCount": 1, "InstanceType": "ml.m5.xlarge", "VolumeSizeInGB": 10},
    )
