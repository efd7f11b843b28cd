import boto3
import pandas as pd
from sklearn.model_selection import train_test_split

FEATURES = ["age", "income", "balance"]


def launch(bucket):
    frame = pd.read_csv("customers.csv")
    X_train, X_test, y_train, y_test = train_test_split(
        frame[FEATURES], frame["churn"], test_size=0.2
    )
    X_train.to_csv(f"s3://{bucket}/train.csv")
    X_test.to_csv(f"s3://{bucket}/validation.csv")
    client = boto3.client("sagemaker")
    client.create_training_job(
        TrainingJobName="churn-xgb",
        AlgorithmSpecification={"TrainingImage": "xgboost:latest", "TrainingInputMode": "File"},
        RoleArn="arn:aws:iam::000000000000:role/SageMakerRole",
        ResourceConfig={"InstanceCount": 1, "InstanceType": "ml.m5.xlarge", "VolumeSizeInGB": 10},
    )
